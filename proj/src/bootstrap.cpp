#include "depbreak/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

#include <omp.h>

#include "depbreak/error.hpp"
#include "depbreak/path_kernel.hpp"
#include "depbreak/rng.hpp"

namespace depbreak {
namespace {

void validate(const BootstrapConfig& config) {
  if (config.B == 0) throw Error(ErrorCode::InsufficientReplicates, "bootstrap needs B >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  static std::atomic_flag warned = ATOMIC_FLAG_INIT;
  if (config.B < 100 && !warned.test_and_set())
    std::clog << "warning: B = " << config.B << " bootstrap replicates is below 100; inference is coarse\n";
}

// K = max_t |A(t/T) - (t/T) A(1)|^2 with A(t/T) = (t/T) sqrt(T) (m*_t - m_T),
// m* from the resample and m_T from the original residuals.
double bootstrap_sup(std::span<const std::size_t> grid, std::span<const double> boot, std::size_t d,
                     std::span<const std::size_t> cols, std::span<const double> m_T, std::size_t T) {
  const double root_T = std::sqrt(static_cast<double>(T));
  const double* last = boot.data() + (grid.size() - 1) * d;
  double best = 0.0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const double s = static_cast<double>(grid[r]) / static_cast<double>(T);
    const double* row = boot.data() + r * d;
    double ss = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double a_t = s * root_T * (row[cols[c]] - m_T[c]);
      const double a_1 = root_T * (last[cols[c]] - m_T[c]);
      const double diff = a_t - s * a_1;
      ss += diff * diff;
    }
    best = std::max(best, ss);
  }
  return best;
}

struct SpecSlice {
  std::vector<std::size_t> cols;  // positions inside the merged spec
  std::vector<double> m_T;        // full-sample m_T of the original data
};

// K^(p) for every spec; result[s][p].
std::vector<std::vector<double>> replicate_statistics(const RankPanel& ranks, const MeasureSpec& merged,
                                                      const std::vector<SpecSlice>& slices,
                                                      std::span<const std::size_t> grid,
                                                      const BootstrapConfig& config) {
  const std::size_t T = ranks.T;
  const std::size_t d = merged.size();
  std::vector<std::vector<double>> out(slices.size(), std::vector<double>(config.B));
  const auto B = static_cast<std::int64_t>(config.B);

#pragma omp parallel if (!omp_in_parallel())
  {
    PathKernel kernel(merged, ranks.N);
    RankPanel resampled;
    std::vector<std::size_t> rows(T);
    std::vector<double> values(grid.size() * d);
#pragma omp for schedule(dynamic)
    for (std::int64_t p = 0; p < B; ++p) {
      Rng rng = make_stream(config.seed, {static_cast<std::uint64_t>(p)});
      std::uniform_int_distribution<std::size_t> pick(0, T - 1);
      for (auto& r : rows) r = pick(rng);
      gather_rows(ranks, rows, resampled, ResampleTies::DrawOrder);
      kernel.evaluate(resampled, grid, values);
      for (std::size_t s = 0; s < slices.size(); ++s)
        out[s][static_cast<std::size_t>(p)] =
            bootstrap_sup(grid, values, d, slices[s].cols, slices[s].m_T, T);
    }
  }
  return out;
}

}  // namespace

double empirical_quantile(std::span<const double> sample, double gamma) {
  if (sample.empty()) throw Error(ErrorCode::InsufficientReplicates, "empty bootstrap sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double B = static_cast<double>(sorted.size());
  auto idx = static_cast<std::int64_t>(std::ceil(B * gamma - 1e-9));
  idx = std::clamp<std::int64_t>(idx, 1, static_cast<std::int64_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(idx - 1)];
}

double bootstrap_p_value(std::span<const double> replicates, double statistic) {
  if (replicates.empty()) throw Error(ErrorCode::InsufficientReplicates, "empty bootstrap sample");
  auto c = std::count_if(replicates.begin(), replicates.end(), [&](double k) { return k >= statistic; });
  return static_cast<double>(c) / static_cast<double>(replicates.size());
}

std::vector<TestResult> run_tests(const Matrix& residuals, const std::vector<MeasureSpec>& specs,
                                  const BootstrapConfig& config) {
  validate(config);
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "no measure specs given");
  const MeasureSpec merged = merge_specs(specs);
  const std::size_t T = residuals.rows();
  if (residuals.cols() < 2) throw Error(ErrorCode::TooFewColumns, "need at least two series");
  check_trim(merged, config.epsilon, T);

  const Matrix clean = resolve_ties(residuals, config.ties, config.seed);
  const RankPanel ranks = rank_panel(clean);
  const auto grid = make_grid(T, config.epsilon, config.stride);
  const std::size_t d = merged.size();

  std::vector<double> original(grid.size() * d);
  PathKernel kernel(merged, ranks.N);
  kernel.evaluate(ranks, grid, original);

  std::vector<SpecSlice> slices;
  std::vector<TestResult> results;
  for (const auto& spec : specs) {
    SpecSlice slice;
    slice.cols = item_positions(merged, spec);
    std::vector<double> own(grid.size() * spec.size());
    for (std::size_t r = 0; r < grid.size(); ++r)
      for (std::size_t c = 0; c < slice.cols.size(); ++c)
        own[r * spec.size() + c] = original[r * d + slice.cols[c]];
    for (std::size_t c = 0; c < slice.cols.size(); ++c)
      slice.m_T.push_back(original[(grid.size() - 1) * d + slice.cols[c]]);
    slices.push_back(std::move(slice));

    TestResult res;
    res.cusum = cusum_statistic(grid, own, spec.size(), T);
    res.spec = spec;
    res.config = config;
    results.push_back(std::move(res));
  }

  auto reps = replicate_statistics(ranks, merged, slices, grid, config);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    TestResult& res = results[s];
    res.replicates = std::move(reps[s]);
    res.critical_value = empirical_quantile(res.replicates, 1.0 - config.alpha);
    res.p_value = bootstrap_p_value(res.replicates, res.cusum.statistic);
    res.reject = res.cusum.statistic > res.critical_value;
  }
  return results;
}

TestResult run_test(const Matrix& residuals, const MeasureSpec& spec, const BootstrapConfig& config) {
  return std::move(run_tests(residuals, {spec}, config).front());
}

TestResult run_test(const ResidualPanel& residuals, const MeasureSpec& spec, const BootstrapConfig& config) {
  return run_test(residuals.values, spec, config);
}

CriticalValue critical_value_bootstrap(const Matrix& residuals, const MeasureSpec& spec,
                                       const BootstrapConfig& config) {
  TestResult res = run_test(residuals, spec, config);
  return {res.critical_value, res.p_value, std::move(res.replicates)};
}

BreakCI pivot_interval(double s_hat, std::size_t T, std::span<const double> replicate_s, double alpha,
                       double epsilon) {
  BreakCI ci;
  ci.s_hat = s_hat;
  ci.alpha = alpha;
  ci.k_hat = static_cast<std::size_t>(std::floor(s_hat * static_cast<double>(T) + 1e-9));
  ci.replicates.assign(replicate_s.begin(), replicate_s.end());
  ci.c_low = empirical_quantile(replicate_s, alpha / 2.0);
  ci.c_high = empirical_quantile(replicate_s, 1.0 - alpha / 2.0);
  ci.c_low_index = static_cast<std::size_t>(std::llround(ci.c_low * static_cast<double>(T)));
  ci.c_high_index = static_cast<std::size_t>(std::llround(ci.c_high * static_cast<double>(T)));
  ci.raw_lower = 2.0 * s_hat - ci.c_high;
  ci.raw_upper = 2.0 * s_hat - ci.c_low;
  ci.lower = std::clamp(ci.raw_lower, epsilon, 1.0);
  ci.upper = std::clamp(ci.raw_upper, epsilon, 1.0);
  return ci;
}

BreakCI break_ci_bootstrap(const Matrix& residuals, const MeasureSpec& spec, double s_hat,
                           const BootstrapConfig& config) {
  validate(config);
  const std::size_t T = residuals.rows();
  if (residuals.cols() < 2) throw Error(ErrorCode::TooFewColumns, "need at least two series");
  if (!(s_hat > 0.0 && s_hat < 1.0))
    throw Error(ErrorCode::InvalidArgument, "break fraction must lie in (0,1)");
  check_trim(spec, config.epsilon, T);
  const auto k = static_cast<std::size_t>(std::floor(s_hat * static_cast<double>(T) + 1e-9));
  const std::size_t trim = trim_start(config.epsilon, T);
  if (k < trim || T - k < trim)
    throw Error(ErrorCode::SegmentTooShort, "segments of length " + std::to_string(k) + " and " +
                                                std::to_string(T - k) + " must both reach the trim window " +
                                                std::to_string(trim));

  const Matrix clean = resolve_ties(residuals, config.ties, config.seed);
  const RankPanel ranks = rank_panel(clean);
  const auto grid = make_grid(T, config.epsilon, config.stride);
  const std::size_t d = spec.size();
  std::vector<double> s_rep(config.B);
  const auto B = static_cast<std::int64_t>(config.B);

#pragma omp parallel if (!omp_in_parallel())
  {
    PathKernel kernel(spec, ranks.N);
    RankPanel resampled;
    std::vector<std::size_t> rows(T);
    std::vector<double> values(grid.size() * d);
#pragma omp for schedule(dynamic)
    for (std::int64_t p = 0; p < B; ++p) {
      Rng rng = make_stream(config.seed, {static_cast<std::uint64_t>(p)});
      std::uniform_int_distribution<std::size_t> pre(0, k - 1);
      std::uniform_int_distribution<std::size_t> post(k, T - 1);
      for (std::size_t r = 0; r < k; ++r) rows[r] = pre(rng);
      for (std::size_t r = k; r < T; ++r) rows[r] = post(rng);
      gather_rows(ranks, rows, resampled, ResampleTies::Keep);
      kernel.evaluate(resampled, grid, values);
      s_rep[static_cast<std::size_t>(p)] =
          static_cast<double>(cusum_argmax(grid, values, d, T)) / static_cast<double>(T);
    }
  }
  return pivot_interval(s_hat, T, s_rep, config.alpha, config.epsilon);
}

bool same_break(double s_a, const BreakCI& ci_a, double s_b, const BreakCI& ci_b) {
  const double lo = std::max(ci_a.lower, ci_b.lower);
  const double hi = std::min(ci_a.upper, ci_b.upper);
  return lo <= s_a && s_a <= hi && lo <= s_b && s_b <= hi;
}

double common_break_alpha(double alpha_star) {
  if (!(alpha_star > 0.0 && alpha_star < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha* must lie in (0,1)");
  return 1.0 - std::sqrt(1.0 - alpha_star);
}

}  // namespace depbreak
