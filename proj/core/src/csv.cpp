#include "hwbench/csv.hpp"

#include "hwbench/errors.hpp"
#include "hwbench/number_format.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace hwbench {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  if (s.empty()) throw ParseError(line, std::string("empty ") + column);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(line, std::string("invalid number in ") + column + ": '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, std::size_t line, const char* column) {
  if (s.empty()) throw ParseError(line, std::string("empty ") + column);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError(line, std::string("invalid integer in ") + column + ": '" + s + "'");
  }
  return v;
}

bool parse_flag(const std::string& s, std::size_t line, const char* column) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError(line, std::string("expected 0 or 1 in ") + column + ": '" + s + "'");
}

Branch parse_branch(const std::string& s, std::size_t line) {
  try {
    return branch_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

// Reads the header and hands each data row (split, with its line number) to `row`.
template <typename F>
void read_rows(std::istream& is, const char* header, std::size_t columns, F&& row) {
  std::string line;
  std::size_t n = 0;
  if (!std::getline(is, line)) throw ParseError(1, "missing header");
  ++n;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError(n, "unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != columns) {
      throw ParseError(n, "expected " + std::to_string(columns) + " fields, got " +
                              std::to_string(fields.size()));
    }
    row(fields, n);
  }
}

}  // namespace

std::string iv_row(const IVPoint& p) {
  return std::to_string(p.index) + ',' + format_sci(p.e_app_v) + ',' + format_sci(p.i_ss_a) + ',' +
         std::string(to_string(p.branch)) + ',' + format_sci(p.t_settled_s) + ',' +
         (p.timed_out ? "timeout" : "-");
}

void write_iv_csv(std::ostream& os, const IVCurve& curve) {
  os << kIvHeader << '\n';
  for (const auto& p : curve) os << iv_row(p) << '\n';
}

IVCurve parse_iv_csv(std::istream& is) {
  IVCurve out;
  read_rows(is, kIvHeader, 6, [&](const std::vector<std::string>& f, std::size_t line) {
    IVPoint p;
    p.index = static_cast<int>(parse_int(f[0], line, "index"));
    p.e_app_v = parse_double(f[1], line, "e_app_v");
    p.i_ss_a = parse_double(f[2], line, "i_ss_a");
    p.branch = parse_branch(f[3], line);
    p.t_settled_s = parse_double(f[4], line, "t_settled_s");
    if (f[5] == "timeout") {
      p.timed_out = true;
    } else if (f[5] != "-") {
      throw ParseError(line, "unknown flags '" + f[5] + "'");
    }
    out.push_back(p);
  });
  return out;
}

std::string conductivity_row(const ConductivityPoint& p) {
  return std::string(to_string(p.branch)) + ',' + format_sci(p.e_mid_v) + ',' +
         format_sci(p.log10_a_o2) + ',' + format_sci(p.sigma_e) + ',' + (p.repaired ? "1" : "0");
}

void write_conductivity_csv(std::ostream& os, const std::vector<ConductivityPoint>& points) {
  os << kConductivityHeader << '\n';
  for (const auto& p : points) os << conductivity_row(p) << '\n';
}

std::vector<ConductivityPoint> parse_conductivity_csv(std::istream& is) {
  std::vector<ConductivityPoint> out;
  read_rows(is, kConductivityHeader, 5, [&](const std::vector<std::string>& f, std::size_t line) {
    ConductivityPoint p{};
    p.branch = parse_branch(f[0], line);
    p.e_mid_v = parse_double(f[1], line, "e_mid_v");
    p.log10_a_o2 = parse_double(f[2], line, "log10_a_o2");
    p.a_o2 = std::pow(10.0, p.log10_a_o2);
    p.sigma_e = parse_double(f[3], line, "sigma_s_per_m");
    p.repaired = parse_flag(f[4], line, "repaired");
    out.push_back(p);
  });
  return out;
}

std::string slope_row(const BranchSlope& s) {
  return std::string(to_string(s.branch)) + ',' + format_sci(s.fit.range.log10_lo) + ',' +
         format_sci(s.fit.range.log10_hi) + ',' + format_sci(s.fit.slope) + ',' +
         format_sci(s.fit.intercept) + ',' + std::to_string(s.fit.n_points) + ',' +
         format_sci(s.fit.rms_residual);
}

void write_slopes_csv(std::ostream& os, const std::vector<BranchSlope>& slopes) {
  os << kSlopesHeader << '\n';
  for (const auto& s : slopes) os << slope_row(s) << '\n';
}

std::vector<BranchSlope> parse_slopes_csv(std::istream& is) {
  std::vector<BranchSlope> out;
  read_rows(is, kSlopesHeader, 7, [&](const std::vector<std::string>& f, std::size_t line) {
    BranchSlope s{};
    s.branch = parse_branch(f[0], line);
    s.fit.range.log10_lo = parse_double(f[1], line, "log10_a_lo");
    s.fit.range.log10_hi = parse_double(f[2], line, "log10_a_hi");
    s.fit.slope = parse_double(f[3], line, "slope");
    s.fit.intercept = parse_double(f[4], line, "intercept");
    s.fit.n_points = static_cast<int>(parse_int(f[5], line, "n_points"));
    s.fit.rms_residual = parse_double(f[6], line, "rms_residual");
    out.push_back(s);
  });
  return out;
}

std::string trace_row(const CurrentSample& s) {
  return format_sci(s.t_s) + ',' + format_sci(s.raw_a) + ',' + format_sci(s.filtered_a) + ',' +
         format_sci(s.cell_temp_c) + ',' + (s.heater_on ? "1" : "0");
}

std::vector<CurrentSample> parse_trace_csv(std::istream& is) {
  std::vector<CurrentSample> out;
  read_rows(is, kTraceHeader, 5, [&](const std::vector<std::string>& f, std::size_t line) {
    CurrentSample s;
    s.t_s = parse_double(f[0], line, "t_s");
    s.raw_a = parse_double(f[1], line, "raw_a");
    s.filtered_a = parse_double(f[2], line, "filtered_a");
    s.cell_temp_c = parse_double(f[3], line, "cell_temp_c");
    s.heater_on = parse_flag(f[4], line, "heater_on");
    out.push_back(s);
  });
  return out;
}

std::string trace_file_name(int index, double e_app_v) {
  const long long mv = std::llround(e_app_v * 1000.0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "trace_%03d_%c%lldmV.csv", index, mv < 0 ? 'm' : 'p',
                mv < 0 ? -mv : mv);
  return buf;
}

}  // namespace hwbench
