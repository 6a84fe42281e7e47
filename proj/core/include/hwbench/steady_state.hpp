#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hwbench {

struct FieldError {
  std::string field;
  std::string message;
};

// Np / Nw / s / Nm of the chronoamperometric steady-state test.
struct SteadyStateParams {
  int np_s = 5;
  int nw_s = 5;
  double threshold_a = 3e-9;
  int nm_s = 10;
  double timeout_s = 7200.0;

  std::vector<FieldError> check() const;
  // Throws ConfigError naming the first violated field.
  void validate() const;

  friend bool operator==(const SteadyStateParams&, const SteadyStateParams&) = default;
};

// Partial update of the live parameters; absent fields are left unchanged.
struct ParamPatch {
  std::optional<int> np_s;
  std::optional<int> nw_s;
  std::optional<double> threshold_a;
  std::optional<int> nm_s;
  std::optional<double> timeout_s;

  bool empty() const noexcept {
    return !np_s && !nw_s && !threshold_a && !nm_s && !timeout_s;
  }
  SteadyStateParams applied_to(SteadyStateParams p) const;
};

enum class SteadyVerdict { NotReady, Steady, NotSteady };

// Time (s after voltage application) of the first check: both windows populated.
int first_check_time(const SteadyStateParams& p);

/// |mean(I over the Nw readings ending at k) - mean(I over the Nw readings ending at k - Np)|.
/// `readings[j]` is the 1 Hz filtered current read at t = j + 1 s; k is a time in seconds.
/// Returns nullopt when either window is not fully populated.
std::optional<double> window_mean_difference(std::span<const double> readings, int np_s, int nw_s,
                                             int k);

SteadyVerdict steady_state_check(std::span<const double> readings, const SteadyStateParams& p,
                                 int k);

// Check schedule of one voltage step: the first check at first_check_time,
// then every Np seconds. Parameters may be replaced between checks; the new
// Np governs the spacing from the next check on.
class SteadyStateDetector {
 public:
  explicit SteadyStateDetector(const SteadyStateParams& params)
      : params_(params), next_check_(first_check_time(params)) {}

  const SteadyStateParams& params() const noexcept { return params_; }
  void set_params(const SteadyStateParams& params) noexcept { params_ = params; }
  int next_check_s() const noexcept { return next_check_; }
  bool due(int t) const noexcept { return t >= next_check_; }

  struct Outcome {
    SteadyVerdict verdict;
    std::optional<double> delta_a;
  };
  /// Evaluates at check instant t over readings[0, t); schedules the next check unless steady.
  Outcome check(std::span<const double> readings, int t);

 private:
  SteadyStateParams params_;
  int next_check_;
};

/// Time of the first Steady verdict when the schedule is run over `readings`
/// (readings[j] read at t = j + 1), or nullopt if none fires.
std::optional<int> first_detection_time(std::span<const double> readings, const SteadyStateParams& p);

/// Mean of `nm_s` readings starting at index `first`. Throws InsufficientDataError when short.
double measure_steady_current(std::span<const double> readings, std::size_t first, int nm_s);

}  // namespace hwbench
