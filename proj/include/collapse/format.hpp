#pragma once

#include <string>

namespace collapse {

/// Shortest-safe round-trip text for a double: 17 significant digits,
/// independent of the global locale.
std::string num(double v);

}  // namespace collapse
