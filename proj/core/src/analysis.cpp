#include "hwbench/analysis.hpp"

#include "hwbench/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hwbench {

std::vector<DerivativePoint> differentiate_iv(std::span<const IVPoint> curve, Branch branch) {
  std::vector<std::pair<double, double>> nodes;
  for (const auto& p : curve) {
    if (p.branch == branch && !p.timed_out) nodes.emplace_back(p.e_app_v, p.i_ss_a);
  }
  if (nodes.size() < 2) {
    throw InsufficientDataError("differentiate_iv: branch " + std::string(to_string(branch)) +
                                " has fewer than 2 points");
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<DerivativePoint> out;
  out.reserve(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double de = nodes[i + 1].first - nodes[i].first;
    if (de == 0.0) {
      throw PlanError("differentiate_iv: repeated voltage on branch " +
                      std::string(to_string(branch)));
    }
    out.push_back({0.5 * (nodes[i].first + nodes[i + 1].first),
                   (nodes[i + 1].second - nodes[i].second) / de});
  }
  return out;
}

namespace {

template <typename T, typename Value, typename Replace>
RepairResult<T> repair_impl(std::span<const T> in, Value value, Replace replace) {
  RepairResult<T> out;
  out.flags.resize(in.size(), RepairFlag::Kept);
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = value(in[i]);
    if (v > 0.0) {
      out.series.push_back(in[i]);
      out.repaired.push_back(false);
      continue;
    }
    const bool isolated = i > 0 && i + 1 < n && value(in[i - 1]) > 0.0 && value(in[i + 1]) > 0.0;
    if (isolated) {
      out.series.push_back(replace(in[i], 0.5 * (value(in[i - 1]) + value(in[i + 1]))));
      out.repaired.push_back(true);
      out.flags[i] = RepairFlag::Repaired;
    } else {
      out.flags[i] = RepairFlag::Excluded;
    }
  }
  return out;
}

}  // namespace

RepairResult<double> repair_negative_points(std::span<const double> values) {
  return repair_impl<double>(
      values, [](double v) { return v; }, [](double, double r) { return r; });
}

RepairResult<DerivativePoint> repair_negative_points(std::span<const DerivativePoint> series) {
  return repair_impl<DerivativePoint>(
      series, [](const DerivativePoint& p) { return p.di_de; },
      [](const DerivativePoint& p, double r) { return DerivativePoint{p.e_mid_v, r}; });
}

std::vector<ConductivityPoint> conductivity_curve(std::span<const IVPoint> curve,
                                                  const CellGeometry& geom,
                                                  const ReferenceAtmosphere& ref,
                                                  const PhysicalConstants& consts, Branch branch) {
  const auto derivatives = differentiate_iv(curve, branch);
  const auto repaired = repair_negative_points(std::span<const DerivativePoint>(derivatives));
  std::vector<ConductivityPoint> out;
  out.reserve(repaired.series.size());
  for (std::size_t i = 0; i < repaired.series.size(); ++i) {
    const auto& d = repaired.series[i];
    out.push_back({nernst_activity(d.e_mid_v, ref, consts),
                   nernst_log10_activity(d.e_mid_v, ref, consts),
                   conductivity_from_derivative(d.di_de, geom), d.e_mid_v, repaired.repaired[i],
                   branch});
  }
  return out;
}

SlopeFit fit_slope(std::span<const ConductivityPoint> points, ActivityRange range) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points) {
    if (p.log10_a_o2 >= range.log10_lo && p.log10_a_o2 <= range.log10_hi && p.sigma_e > 0.0) {
      xy.emplace_back(p.log10_a_o2, std::log10(p.sigma_e));
    }
  }
  if (xy.size() < 2) {
    throw InsufficientDataError("fit_slope: fewer than 2 points in the activity range");
  }
  const double n = static_cast<double>(xy.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) {
    throw InsufficientDataError("fit_slope: all points share one activity");
  }
  SlopeFit fit{};
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.range = range;
  fit.n_points = static_cast<int>(xy.size());
  double ss = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

std::vector<ActivityRange> default_fit_ranges(std::span<const ConductivityPoint> points,
                                              double window_decades) {
  if (points.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(
      points.begin(), points.end(),
      [](const auto& a, const auto& b) { return a.log10_a_o2 < b.log10_a_o2; });
  const double lo = lo_it->log10_a_o2;
  const double hi = hi_it->log10_a_o2;
  const ActivityRange low{lo, std::min(lo + window_decades, hi)};
  const ActivityRange high{std::max(hi - window_decades, lo), hi};
  if (low == high) return {low};
  return {low, high};
}

AnalysisReport analyze_curve(std::span<const IVPoint> curve, const CellGeometry& geom,
                             const ReferenceAtmosphere& ref, const PhysicalConstants& consts,
                             const AnalysisOptions& options) {
  std::vector<Branch> branches;
  for (const auto& p : curve) {
    if (!p.timed_out && std::find(branches.begin(), branches.end(), p.branch) == branches.end()) {
      branches.push_back(p.branch);
    }
  }

  AnalysisReport report;
  std::vector<std::pair<Branch, std::vector<ConductivityPoint>>> per_branch;
  for (const auto b : branches) {
    try {
      auto pts = conductivity_curve(curve, geom, ref, consts, b);
      report.points.insert(report.points.end(), pts.begin(), pts.end());
      per_branch.emplace_back(b, std::move(pts));
    } catch (const InsufficientDataError&) {
      // a single recorded point cannot be differentiated
    }
  }

  report.ranges = options.ranges.empty()
                      ? default_fit_ranges(report.points, options.window_decades)
                      : options.ranges;
  for (const auto& [branch, pts] : per_branch) {
    for (const auto& range : report.ranges) {
      try {
        report.slopes.push_back({branch, fit_slope(pts, range)});
      } catch (const InsufficientDataError&) {
      }
    }
  }
  return report;
}

}  // namespace hwbench
