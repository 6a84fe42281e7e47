#pragma once

/**
 * On-disk formats of a campaign output directory.
 *
 *   iv.csv            index,e_app_v,i_ss_a,branch,t_settled_s,flags
 *   conductivity.csv  branch,e_mid_v,log10_a_o2,sigma_s_per_m,repaired
 *   slopes.csv        branch,log10_a_lo,log10_a_hi,slope,intercept,n_points,rms_residual
 *   trace_NNN_<p|m><mV>mV.csv  t_s,raw_a,filtered_a,cell_temp_c,heater_on
 *
 * Floating-point fields use format_sci (9 significant digits). Parsers reject
 * malformed input with a ParseError carrying the 1-based line number.
 */

#include "hwbench/analysis.hpp"
#include "hwbench/cell_sim.hpp"
#include "hwbench/iv_curve.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace hwbench {

inline constexpr const char* kIvHeader = "index,e_app_v,i_ss_a,branch,t_settled_s,flags";
inline constexpr const char* kConductivityHeader =
    "branch,e_mid_v,log10_a_o2,sigma_s_per_m,repaired";
inline constexpr const char* kSlopesHeader =
    "branch,log10_a_lo,log10_a_hi,slope,intercept,n_points,rms_residual";
inline constexpr const char* kTraceHeader = "t_s,raw_a,filtered_a,cell_temp_c,heater_on";

std::string iv_row(const IVPoint& p);
void write_iv_csv(std::ostream& os, const IVCurve& curve);
IVCurve parse_iv_csv(std::istream& is);

std::string conductivity_row(const ConductivityPoint& p);
void write_conductivity_csv(std::ostream& os, const std::vector<ConductivityPoint>& points);
std::vector<ConductivityPoint> parse_conductivity_csv(std::istream& is);

std::string slope_row(const BranchSlope& s);
void write_slopes_csv(std::ostream& os, const std::vector<BranchSlope>& slopes);
std::vector<BranchSlope> parse_slopes_csv(std::istream& is);

std::string trace_row(const CurrentSample& s);
std::vector<CurrentSample> parse_trace_csv(std::istream& is);

// trace_<index>_<p|m><|mV|>mV.csv, e.g. trace_003_m150mV.csv.
std::string trace_file_name(int index, double e_app_v);

}  // namespace hwbench
