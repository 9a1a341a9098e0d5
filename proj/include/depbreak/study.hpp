#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "depbreak/bootstrap.hpp"
#include "depbreak/copsim.hpp"
#include "depbreak/marginal_filter.hpp"
#include "depbreak/panel.hpp"

namespace depbreak {

/// Filter, then test. The bootstrap seed is config.seed.
TestResult run_test(const ReturnPanel& panel, const MeasureSpec& spec, MarginalMode mode,
                    const BootstrapConfig& config);

/// Seed used for the break CI that accompanies a test run with `seed`.
std::uint64_t ci_seed(std::uint64_t seed);

struct FullSampleResult {
  TestResult test;
  std::optional<BreakCI> ci;              // present when the test rejects
  std::optional<Date> break_date;         // date of residual k_hat, if dated
  std::optional<Date> ci_lower_date;
  std::optional<Date> ci_upper_date;
  MarginalMode mode = MarginalMode::Ar1Garch11;
  std::vector<MarginalFit> fits;
  std::vector<std::string> names;
};

/// Filters once and tests once on t = 1..T; on rejection attaches the break CI.
FullSampleResult full_sample_test(const ReturnPanel& panel, const MeasureSpec& spec, MarginalMode mode,
                                  const BootstrapConfig& config);

struct ScanBreak {
  std::size_t k_hat = 0;          // 1-based row of the input panel
  std::optional<Date> date;
  double s_hat = 0.0;             // within the window
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  std::size_t window_start = 0;   // 1-based first row of the window
};

struct RollingScanResult {
  std::vector<ScanBreak> breaks;
  std::size_t windows_tested = 0;
  std::size_t window = 0;
  std::size_t stride = 1;
  MeasureSpec spec;
  BootstrapConfig config;
  MarginalMode mode = MarginalMode::Ar1Garch11;
  /// Mean of the detected break rows, 0 when none.
  double mean_break_index() const;
};

/// Tests windows [t1, t1 + L - 1] starting at t1 = 1, re-fitting marginals per
/// window. A rejection at window row k records the absolute row t1 - 1 + k and
/// restarts at the row after it; otherwise t1 advances by `stride`. Window w
/// uses bootstrap seed stream_seed(config.seed, {t1}). No multiple-testing
/// correction is applied.
RollingScanResult rolling_scan(const ReturnPanel& panel, const MeasureSpec& spec, std::size_t L,
                               MarginalMode mode, const BootstrapConfig& config, std::size_t stride = 1);

struct McTable {
  DgpSpec base;
  std::vector<double> theta_post;        // columns
  std::vector<MeasureSpec> specs;        // rows
  std::size_t reps = 0;
  BootstrapConfig config;
  std::vector<std::vector<std::size_t>> rejections;  // [spec][theta]

  double rate(std::size_t spec, std::size_t theta) const;
  /// Binomial standard error sqrt(r (1 - r) / reps).
  double standard_error(std::size_t spec, std::size_t theta) const;
};

/// Rejection rates of every spec at every post-break parameter. Rep r of cell c
/// simulates from stream_seed(config.seed, {c, r}); all specs in a cell share
/// the simulated panels and the bootstrap resamples. Simulated draws are used
/// as residuals directly.
McTable mc_rejection_table(const DgpSpec& base, std::span<const double> theta_post,
                           const std::vector<MeasureSpec>& specs, std::size_t reps,
                           const BootstrapConfig& config);

struct SingleBreakCoverage {
  DgpSpec dgp;
  MeasureSpec spec_a, spec_b;
  std::size_t reps = 0;
  std::size_t covered_a = 0, covered_b = 0, covered_both = 0;
  std::size_t degenerate = 0;  // reps with a segment shorter than the trim, counted as not covered
  BootstrapConfig config;

  double p_a() const { return static_cast<double>(covered_a) / static_cast<double>(reps); }
  double p_b() const { return static_cast<double>(covered_b) / static_cast<double>(reps); }
  double p_both() const { return static_cast<double>(covered_both) / static_cast<double>(reps); }
};

/// Break at dgp.break_fraction; per rep, s_hat and the pivot CI under both
/// specs on the same panel.
SingleBreakCoverage mc_coverage_single(const DgpSpec& dgp, const MeasureSpec& spec_a,
                                       const MeasureSpec& spec_b, std::size_t reps,
                                       const BootstrapConfig& config);

struct TwoBreakCoverage {
  DgpSpec dgp_a, dgp_b;
  MeasureSpec spec_a, spec_b;
  std::size_t reps = 0;
  std::size_t covered_a = 0;      // s0_a in K_a
  std::size_t covered_b = 0;      // s0_b in K_b
  std::size_t joint = 0;          // s0_a and s0_b both in K_a and K_b
  std::size_t degenerate = 0;
  BootstrapConfig config;

  double p_a() const { return static_cast<double>(covered_a) / static_cast<double>(reps); }
  double p_b() const { return static_cast<double>(covered_b) / static_cast<double>(reps); }
  double p_joint() const { return static_cast<double>(joint) / static_cast<double>(reps); }
};

/// Two independent panels with breaks at dgp_a and dgp_b; spec_a is applied to
/// the first and spec_b to the second.
TwoBreakCoverage mc_coverage_two_break(const DgpSpec& dgp_a, const DgpSpec& dgp_b, const MeasureSpec& spec_a,
                                       const MeasureSpec& spec_b, std::size_t reps,
                                       const BootstrapConfig& config);

struct RollingSeries {
  std::vector<std::size_t> end_index;  // 1-based last row of each window
  std::vector<Date> dates;             // empty for undated input
  std::vector<double> values;
  std::size_t window = 0;
  std::vector<Date> markers;           // break dates to flag in plot data
};

/// Pair-averaged Spearman's rho over each window of `window` consecutive rows.
RollingSeries rolling_spearman(const ResidualPanel& panel, std::size_t window,
                               TiePolicy ties = TiePolicy::Fail, std::uint64_t seed = 0);

}  // namespace depbreak
