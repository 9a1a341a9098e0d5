#include "depbreak/study.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <omp.h>

#include "depbreak/error.hpp"
#include "depbreak/rng.hpp"

namespace depbreak {
namespace {

std::optional<Date> date_at(const std::vector<Date>& dates, std::size_t k) {
  if (k == 0 || k > dates.size()) return std::nullopt;
  return dates[k - 1];
}

// Runs body(i) for i in [0, n) in parallel and rethrows the first failure in
// index order, prefixed with `what(i)`.
template <class Body, class What>
void parallel_for_reps(std::size_t n, Body body, What what) {
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.code(), what(i) + ": " + e.detail());
    }
  }
}

double estimate_break(const Matrix& values, const MeasureSpec& spec, const BootstrapConfig& config) {
  PathOptions opt;
  opt.epsilon = config.epsilon;
  opt.stride = config.stride;
  opt.ties = config.ties;
  opt.jitter_seed = config.seed;
  return cusum_statistic(dependence_path(values, spec, opt)).s_hat;
}

}  // namespace

std::uint64_t ci_seed(std::uint64_t seed) { return stream_seed(seed, {0x6369}); }

TestResult run_test(const ReturnPanel& panel, const MeasureSpec& spec, MarginalMode mode,
                    const BootstrapConfig& config) {
  return run_test(filter_panel(panel, mode), spec, config);
}

FullSampleResult full_sample_test(const ReturnPanel& panel, const MeasureSpec& spec, MarginalMode mode,
                                  const BootstrapConfig& config) {
  const ResidualPanel residuals = filter_panel(panel, mode);
  FullSampleResult out;
  out.mode = mode;
  out.fits = residuals.fits;
  out.names = residuals.names;
  out.test = run_test(residuals, spec, config);
  if (out.test.reject) {
    out.break_date = date_at(residuals.dates, out.test.cusum.k_hat);
    BootstrapConfig cfg = config;
    cfg.seed = ci_seed(config.seed);
    out.ci = break_ci_bootstrap(residuals.values, spec, out.test.cusum.s_hat, cfg);
    const double T = static_cast<double>(residuals.T());
    out.ci_lower_date = date_at(residuals.dates, static_cast<std::size_t>(std::ceil(out.ci->lower * T - 1e-9)));
    out.ci_upper_date = date_at(residuals.dates, static_cast<std::size_t>(std::floor(out.ci->upper * T + 1e-9)));
  }
  return out;
}

double RollingScanResult::mean_break_index() const {
  if (breaks.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : breaks) s += static_cast<double>(b.k_hat);
  return s / static_cast<double>(breaks.size());
}

RollingScanResult rolling_scan(const ReturnPanel& panel, const MeasureSpec& spec, std::size_t L,
                               MarginalMode mode, const BootstrapConfig& config, std::size_t stride) {
  const std::size_t T = panel.T();
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "scan stride must be positive");
  if (L > T)
    throw Error(ErrorCode::WindowTooShort,
                "window length " + std::to_string(L) + " exceeds the sample size " + std::to_string(T));
  const std::size_t offset = mode == MarginalMode::Ar1Garch11 ? 1 : 0;
  const std::size_t effective = L - offset;
  try {
    if (mode == MarginalMode::Ar1Garch11 && L < 50)
      throw Error(ErrorCode::TrimTooSmall, "AR(1)-GARCH(1,1) windows need at least 50 rows");
    check_trim(spec, config.epsilon, effective);
  } catch (const Error& e) {
    throw Error(ErrorCode::WindowTooShort, "window length " + std::to_string(L) + " too short: " + e.detail());
  }

  RollingScanResult out;
  out.window = L;
  out.stride = stride;
  out.spec = spec;
  out.config = config;
  out.mode = mode;
  std::size_t t1 = 1;
  while (t1 + L - 1 <= T) {
    ReturnPanel window;
    window.names = panel.names;
    window.values = panel.values.slice_rows(t1 - 1, L);
    if (!panel.dates.empty()) window.dates.assign(panel.dates.begin() + (t1 - 1), panel.dates.begin() + (t1 - 1 + L));
    BootstrapConfig cfg = config;
    cfg.seed = stream_seed(config.seed, {t1});
    TestResult res;
    try {
      res = run_test(window, spec, mode, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "window starting at row " + std::to_string(t1) + ": " + e.detail());
    }
    ++out.windows_tested;
    if (res.reject) {
      ScanBreak b;
      b.k_hat = t1 - 1 + offset + res.cusum.k_hat;
      b.date = date_at(panel.dates, b.k_hat);
      b.s_hat = res.cusum.s_hat;
      b.statistic = res.cusum.statistic;
      b.critical_value = res.critical_value;
      b.p_value = res.p_value;
      b.window_start = t1;
      out.breaks.push_back(b);
      t1 = b.k_hat + 1;
    } else {
      t1 += stride;
    }
  }
  return out;
}

double McTable::rate(std::size_t spec, std::size_t theta) const {
  return static_cast<double>(rejections[spec][theta]) / static_cast<double>(reps);
}

double McTable::standard_error(std::size_t spec, std::size_t theta) const {
  const double r = rate(spec, theta);
  return std::sqrt(r * (1.0 - r) / static_cast<double>(reps));
}

McTable mc_rejection_table(const DgpSpec& base, std::span<const double> theta_post,
                           const std::vector<MeasureSpec>& specs, std::size_t reps,
                           const BootstrapConfig& config) {
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "need at least one repetition");
  if (theta_post.empty() || specs.empty()) throw Error(ErrorCode::InvalidArgument, "empty Monte Carlo grid");
  McTable table;
  table.base = base;
  table.theta_post.assign(theta_post.begin(), theta_post.end());
  table.specs = specs;
  table.reps = reps;
  table.config = config;
  table.rejections.assign(specs.size(), std::vector<std::size_t>(theta_post.size(), 0));

  for (std::size_t c = 0; c < theta_post.size(); ++c) {
    DgpSpec dgp = base;
    dgp.theta_post = theta_post[c];
    dgp.validate();
    std::vector<std::vector<char>> hit(reps, std::vector<char>(specs.size(), 0));
    parallel_for_reps(
        reps,
        [&](std::size_t r) {
          const std::uint64_t seed = stream_seed(config.seed, {c, r});
          Rng rng = make_stream(seed, {0});
          const ResidualPanel panel = simulate_panel(dgp, rng);
          BootstrapConfig cfg = config;
          cfg.seed = stream_seed(seed, {1});
          const auto results = run_tests(panel.values, specs, cfg);
          for (std::size_t s = 0; s < specs.size(); ++s) hit[r][s] = results[s].reject ? 1 : 0;
        },
        [&](std::size_t r) { return "Monte Carlo cell theta1=" + std::to_string(theta_post[c]) + ", rep " + std::to_string(r); });
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t s = 0; s < specs.size(); ++s) table.rejections[s][c] += static_cast<std::size_t>(hit[r][s]);
  }
  return table;
}

SingleBreakCoverage mc_coverage_single(const DgpSpec& dgp, const MeasureSpec& spec_a, const MeasureSpec& spec_b,
                                       std::size_t reps, const BootstrapConfig& config) {
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "need at least one repetition");
  if (!dgp.break_fraction) throw Error(ErrorCode::InvalidArgument, "coverage design needs a break fraction");
  dgp.validate();
  const double s0 = *dgp.break_fraction;
  SingleBreakCoverage out;
  out.dgp = dgp;
  out.spec_a = spec_a;
  out.spec_b = spec_b;
  out.reps = reps;
  out.config = config;
  // 0: degenerate, bit 1: a covers, bit 2: b covers, bit 4: both in the intersection
  std::vector<int> flags(reps, 0);
  parallel_for_reps(
      reps,
      [&](std::size_t r) {
        const std::uint64_t seed = stream_seed(config.seed, {0, r});
        Rng rng = make_stream(seed, {0});
        const ResidualPanel panel = simulate_panel(dgp, rng);
        BootstrapConfig cfg = config;
        cfg.seed = stream_seed(seed, {1});
        try {
          const BreakCI a = break_ci_bootstrap(panel.values, spec_a, estimate_break(panel.values, spec_a, cfg), cfg);
          const BreakCI b = break_ci_bootstrap(panel.values, spec_b, estimate_break(panel.values, spec_b, cfg), cfg);
          int f = 8;
          if (a.contains(s0)) f |= 1;
          if (b.contains(s0)) f |= 2;
          if (a.contains(s0) && b.contains(s0)) f |= 4;
          flags[r] = f;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SegmentTooShort) throw;
        }
      },
      [](std::size_t r) { return "coverage rep " + std::to_string(r); });
  for (int f : flags) {
    if (f == 0) ++out.degenerate;
    out.covered_a += (f & 1) ? 1 : 0;
    out.covered_b += (f & 2) ? 1 : 0;
    out.covered_both += (f & 4) ? 1 : 0;
  }
  return out;
}

TwoBreakCoverage mc_coverage_two_break(const DgpSpec& dgp_a, const DgpSpec& dgp_b, const MeasureSpec& spec_a,
                                       const MeasureSpec& spec_b, std::size_t reps,
                                       const BootstrapConfig& config) {
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "need at least one repetition");
  if (!dgp_a.break_fraction || !dgp_b.break_fraction)
    throw Error(ErrorCode::InvalidArgument, "coverage design needs break fractions");
  dgp_a.validate();
  dgp_b.validate();
  const double sa = *dgp_a.break_fraction, sb = *dgp_b.break_fraction;
  TwoBreakCoverage out;
  out.dgp_a = dgp_a;
  out.dgp_b = dgp_b;
  out.spec_a = spec_a;
  out.spec_b = spec_b;
  out.reps = reps;
  out.config = config;
  std::vector<int> flags(reps, 0);
  parallel_for_reps(
      reps,
      [&](std::size_t r) {
        const std::uint64_t seed = stream_seed(config.seed, {1, r});
        Rng rng_a = make_stream(seed, {0});
        Rng rng_b = make_stream(seed, {2});
        const ResidualPanel pa = simulate_panel(dgp_a, rng_a);
        const ResidualPanel pb = simulate_panel(dgp_b, rng_b);
        BootstrapConfig cfg = config;
        cfg.seed = stream_seed(seed, {1});
        try {
          const BreakCI a = break_ci_bootstrap(pa.values, spec_a, estimate_break(pa.values, spec_a, cfg), cfg);
          const BreakCI b = break_ci_bootstrap(pb.values, spec_b, estimate_break(pb.values, spec_b, cfg), cfg);
          int f = 8;
          if (a.contains(sa)) f |= 1;
          if (b.contains(sb)) f |= 2;
          if (a.contains(sa) && a.contains(sb) && b.contains(sa) && b.contains(sb)) f |= 4;
          flags[r] = f;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SegmentTooShort) throw;
        }
      },
      [](std::size_t r) { return "two-break coverage rep " + std::to_string(r); });
  for (int f : flags) {
    if (f == 0) ++out.degenerate;
    out.covered_a += (f & 1) ? 1 : 0;
    out.covered_b += (f & 2) ? 1 : 0;
    out.joint += (f & 4) ? 1 : 0;
  }
  return out;
}

RollingSeries rolling_spearman(const ResidualPanel& panel, std::size_t window, TiePolicy ties,
                               std::uint64_t seed) {
  const std::size_t T = panel.T(), N = panel.N();
  if (N < 2) throw Error(ErrorCode::TooFewColumns, "need at least two series");
  if (window < 2 || window > T)
    throw Error(ErrorCode::WindowTooShort, "rolling window " + std::to_string(window) + " not in [2, T]");
  const Matrix clean = resolve_ties(panel.values, ties, seed);
  const std::size_t count = T - window + 1;
  const auto pairs = static_cast<std::int64_t>(N * (N - 1) / 2);
  RollingSeries out;
  out.window = window;
  out.values.resize(count);
  for (std::size_t e = 0; e < count; ++e) out.end_index.push_back(e + window);
  if (!panel.dates.empty()) out.dates.assign(panel.dates.begin() + (window - 1), panel.dates.end());

  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel if (!omp_in_parallel())
  {
    std::vector<std::int64_t> U(window), R(window);
    std::vector<std::size_t> order(window);
#pragma omp for schedule(static)
    for (std::int64_t e = 0; e < n; ++e) {
      const auto first = static_cast<std::size_t>(e);
      std::fill(U.begin(), U.end(), 0);
      std::int64_t sq = 0;
      for (std::size_t c = 0; c < N; ++c) {
        const auto col = clean.col(c).subspan(first, window);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        for (std::size_t k = 0; k < window; ++k) R[order[k]] = static_cast<std::int64_t>(k + 1);
        for (std::size_t k = 0; k < window; ++k) {
          U[k] += R[k];
          sq += R[k] * R[k];
        }
      }
      std::int64_t total = 0;
      for (std::size_t k = 0; k < window; ++k) total += U[k] * U[k];
      out.values[first] = spearman_from_rank_products((total - sq) / 2, pairs, window);
    }
  }
  return out;
}

}  // namespace depbreak
