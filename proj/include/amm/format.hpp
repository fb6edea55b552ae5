#pragma once

#include <string>

namespace amm {

/// Shortest representation that round-trips.
std::string format_shortest(double value);
/// 17 significant digits, the precision used in emitted CSV files.
std::string format_full(double value);

}  // namespace amm
