#include "collapse/format.hpp"

#include <fmt/format.h>

namespace collapse {

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace collapse
