#pragma once

#include <string>

namespace hwbench {

// Scientific notation with 9 significant digits, the textual form of every
// floating-point field this project writes.
std::string format_sci(double value);

// The value a reader recovers after format_sci: rounding to 9 significant digits.
double quantize(double value);

}  // namespace hwbench
