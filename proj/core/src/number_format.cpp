#include "hwbench/number_format.hpp"

#include <cstdio>
#include <cstdlib>

namespace hwbench {

std::string format_sci(double value) {
  if (value == 0.0) value = 0.0;  // no "-0.00000000e+00"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", value);
  return buf;
}

double quantize(double value) { return std::strtod(format_sci(value).c_str(), nullptr); }

}  // namespace hwbench
