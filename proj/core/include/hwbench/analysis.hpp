#pragma once

/**
 * I-V curve to sigma_e(a_O2): forward differences, isolated
 *        non-positive point repair, Nernst mapping and log-log slope fits.
 *
 * Every transformation is pure and operates on one branch at a time.
 */

#include "hwbench/electrochem.hpp"
#include "hwbench/iv_curve.hpp"

#include <span>
#include <vector>

namespace hwbench {

struct DerivativePoint {
  double e_mid_v;
  double di_de;  // A/V

  friend bool operator==(const DerivativePoint&, const DerivativePoint&) = default;
};

/// Forward differences dI/dE between consecutive points of `branch`, placed at
/// the midpoint voltages, ordered by voltage. Timed-out points are skipped.
/// Throws InsufficientDataError for fewer than 2 points and PlanError for a repeated voltage.
std::vector<DerivativePoint> differentiate_iv(std::span<const IVPoint> curve, Branch branch);

enum class RepairFlag { Kept, Repaired, Excluded };

template <typename T>
struct RepairResult {
  std::vector<T> series;           // surviving entries, repaired ones replaced
  std::vector<bool> repaired;      // parallel to `series`
  std::vector<RepairFlag> flags;   // parallel to the input
};

/// A non-positive value with two positive neighbours becomes the mean of the
/// neighbours. Runs of two or more non-positive values and non-positive
/// endpoints are dropped.
RepairResult<double> repair_negative_points(std::span<const double> values);
RepairResult<DerivativePoint> repair_negative_points(std::span<const DerivativePoint> series);

struct ConductivityPoint {
  double a_o2;
  double log10_a_o2;
  double sigma_e;  // S/m
  double e_mid_v;
  bool repaired;
  Branch branch;
};

/// differentiate_iv -> repair_negative_points -> conductivity_from_derivative,
/// with each midpoint voltage mapped to its oxygen activity.
std::vector<ConductivityPoint> conductivity_curve(std::span<const IVPoint> curve,
                                                  const CellGeometry& geom,
                                                  const ReferenceAtmosphere& ref,
                                                  const PhysicalConstants& consts, Branch branch);

// Closed activity interval in decades.
struct ActivityRange {
  double log10_lo;
  double log10_hi;

  friend bool operator==(const ActivityRange&, const ActivityRange&) = default;
};

struct SlopeFit {
  double slope;      // d log10(sigma) / d log10(a)
  double intercept;  // log10(sigma) at a = 1
  ActivityRange range;
  int n_points;
  double rms_residual;  // decades
};

/// Ordinary least squares of log10(sigma_e) on log10(a_O2) over the points inside `range`.
/// Throws InsufficientDataError for fewer than 2 points in range.
SlopeFit fit_slope(std::span<const ConductivityPoint> points, ActivityRange range);

struct AnalysisOptions {
  // Empty: lowest and highest `window_decades`-wide windows of the data.
  std::vector<ActivityRange> ranges;
  double window_decades = 4.0;
};

struct BranchSlope {
  Branch branch;
  SlopeFit fit;
};

struct AnalysisReport {
  std::vector<ConductivityPoint> points;  // grouped by branch, in recording order
  std::vector<BranchSlope> slopes;
  std::vector<ActivityRange> ranges;
};

std::vector<ActivityRange> default_fit_ranges(std::span<const ConductivityPoint> points,
                                              double window_decades);

/// Full analysis of every branch present in the curve. Branches with too few
/// usable points contribute nothing; windows with fewer than 2 points of a branch are skipped.
AnalysisReport analyze_curve(std::span<const IVPoint> curve, const CellGeometry& geom,
                             const ReferenceAtmosphere& ref, const PhysicalConstants& consts,
                             const AnalysisOptions& options);

}  // namespace hwbench
