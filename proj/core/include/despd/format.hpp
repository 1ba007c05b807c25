#pragma once

#include <string>

namespace despd {

/// Shortest decimal text that reads back to the same double; "nan", "inf" and
/// "-inf" for non-finite values.
std::string format_double(double value);

}  // namespace despd
