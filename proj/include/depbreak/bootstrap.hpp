#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "depbreak/cusum.hpp"
#include "depbreak/depmeasures.hpp"
#include "depbreak/panel.hpp"

namespace depbreak {

struct BootstrapConfig {
  std::size_t B = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  std::size_t stride = 1;
  TiePolicy ties = TiePolicy::Fail;
};

struct CriticalValue {
  double critical_value = 0.0;
  double p_value = 1.0;
  std::vector<double> replicates;  // K^(1..B) in replicate order
};

struct TestResult {
  CusumResult cusum;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  MeasureSpec spec;
  BootstrapConfig config;
  std::vector<double> replicates;
};

/// Pivot interval [2 s - c_hi, 2 s - c_lo] for a break fraction, clipped to [eps, 1].
struct BreakCI {
  double s_hat = 0.0;
  std::size_t k_hat = 0;
  double lower = 0.0;       // clipped
  double upper = 0.0;       // clipped
  double raw_lower = 0.0;   // 2 s_hat - c_hi, before clipping
  double raw_upper = 0.0;   // 2 s_hat - c_lo, before clipping
  double c_low = 0.0;       // bootstrap quantile at alpha/2
  double c_high = 0.0;      // bootstrap quantile at 1 - alpha/2
  std::size_t c_low_index = 0;   // c_low * T as a grid time
  std::size_t c_high_index = 0;  // c_high * T as a grid time
  double alpha = 0.05;
  std::vector<double> replicates;  // s_hat^(1..B)

  bool contains(double s) const noexcept { return lower <= s && s <= upper; }
};

/// Order statistic with 1-based index ceil(B * gamma), clamped to [1, B].
double empirical_quantile(std::span<const double> sample, double gamma);

/// (1/B) #{K >= statistic}.
double bootstrap_p_value(std::span<const double> replicates, double statistic);

/// Bootstrap critical value q_{1-alpha} of M_T by i.i.d. row resampling of the
/// residuals. Replicate p draws from make_stream(config.seed, {p}).
CriticalValue critical_value_bootstrap(const Matrix& residuals, const MeasureSpec& spec,
                                       const BootstrapConfig& config);

/// Full test: path, M_T, bootstrap critical value and the M_T > q rule.
TestResult run_test(const Matrix& residuals, const MeasureSpec& spec, const BootstrapConfig& config);
TestResult run_test(const ResidualPanel& residuals, const MeasureSpec& spec, const BootstrapConfig& config);

/// Several specs on the same data and the same bootstrap resamples. The result
/// for each spec equals what run_test returns for it alone.
std::vector<TestResult> run_tests(const Matrix& residuals, const std::vector<MeasureSpec>& specs,
                                  const BootstrapConfig& config);

/// Pivot confidence interval for a break fraction: each replicate resamples
/// floor(s T) rows from the pre-break segment and the rest from the post-break
/// segment, in order, and re-estimates the break by argmax of the CUSUM profile.
BreakCI break_ci_bootstrap(const Matrix& residuals, const MeasureSpec& spec, double s_hat,
                           const BootstrapConfig& config);

/// Pivot interval from given replicate break fractions (no resampling).
BreakCI pivot_interval(double s_hat, std::size_t T, std::span<const double> replicate_s, double alpha,
                       double epsilon);

/// Both estimates lie in the intersection of both intervals. Only meaningful
/// when the two intervals were computed over the same testing period.
bool same_break(double s_a, const BreakCI& ci_a, double s_b, const BreakCI& ci_b);

/// Per-interval level alpha such that (1 - alpha)^2 = 1 - alpha_star.
double common_break_alpha(double alpha_star);

}  // namespace depbreak
