#include "depbreak/depmeasures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depbreak/error.hpp"
#include "depbreak/path_kernel.hpp"
#include "depbreak/rng.hpp"

namespace depbreak {
namespace {

void check_prefix(std::span<const double> x, std::span<const double> y, std::size_t t) {
  if (t < 1 || t > x.size() || t > y.size())
    throw Error(ErrorCode::InvalidArgument, "sample size t out of range");
}

// Ranks as counts of "<=" within the first t values; throws on ties.
std::vector<std::int64_t> prefix_ranks(std::span<const double> v, std::size_t t) {
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::int64_t> rank(t);
  for (std::size_t pos = 0; pos < t; ++pos) {
    if (pos > 0 && v[order[pos]] == v[order[pos - 1]])
      throw Error(ErrorCode::TiesDetected, "tied values among the first " + std::to_string(t) + " observations");
    rank[order[pos]] = static_cast<std::int64_t>(pos) + 1;
  }
  return rank;
}

std::int64_t joint_lower_count(const std::vector<std::int64_t>& rx, const std::vector<std::int64_t>& ry,
                               std::int64_t mx, std::int64_t my) {
  std::int64_t c = 0;
  for (std::size_t k = 0; k < rx.size(); ++k) c += (rx[k] <= mx && ry[k] <= my);
  return c;
}

double column_scale(std::span<const double> col) {
  double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
  double ss = 0.0;
  for (double v : col) ss += (v - mean) * (v - mean);
  double sd = col.size() > 1 ? std::sqrt(ss / static_cast<double>(col.size() - 1)) : 0.0;
  if (sd > 0.0) return sd;
  double amax = 0.0;
  for (double v : col) amax = std::max(amax, std::abs(v));
  return amax > 0.0 ? amax : 1.0;
}

// Indices of entries that share their value with another entry.
std::vector<std::size_t> tied_entries(std::span<const double> col) {
  std::vector<std::size_t> order(col.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
  std::vector<std::size_t> tied;
  for (std::size_t p = 0; p < order.size(); ++p) {
    bool prev = p > 0 && col[order[p]] == col[order[p - 1]];
    bool next = p + 1 < order.size() && col[order[p]] == col[order[p + 1]];
    if (prev || next) tied.push_back(order[p]);
  }
  return tied;
}

}  // namespace

std::int64_t level_threshold(double level, std::size_t t) {
  return static_cast<std::int64_t>(std::floor(level * static_cast<double>(t) + 1e-9));
}

double spearman_from_rank_products(std::int64_t rank_product_sum, std::int64_t pairs, std::size_t t) {
  const double n = static_cast<double>(t);
  return 12.0 * static_cast<double>(rank_product_sum) / (static_cast<double>(pairs) * n * n * n) - 3.0;
}

double quantile_dep_from_count(std::int64_t joint_count, std::int64_t pairs, std::size_t t, double q) {
  const double c = static_cast<double>(joint_count) / (static_cast<double>(pairs) * static_cast<double>(t));
  return q <= 0.5 ? c / q : (1.0 - 2.0 * q + c) / (1.0 - q);
}

double seq_ecdf(std::span<const double> values, std::size_t t, double x) {
  if (t < 1 || t > values.size()) throw Error(ErrorCode::InvalidArgument, "sample size t out of range");
  std::size_t c = 0;
  for (std::size_t k = 0; k < t; ++k) c += values[k] <= x;
  return static_cast<double>(c) / static_cast<double>(t);
}

double seq_copula(std::span<const double> x, std::span<const double> y, std::size_t t, double u,
                  double v) {
  check_prefix(x, y, t);
  auto rx = prefix_ranks(x, t);
  auto ry = prefix_ranks(y, t);
  return static_cast<double>(joint_lower_count(rx, ry, level_threshold(u, t), level_threshold(v, t))) /
         static_cast<double>(t);
}

double seq_spearman(std::span<const double> x, std::span<const double> y, std::size_t t) {
  check_prefix(x, y, t);
  auto rx = prefix_ranks(x, t);
  auto ry = prefix_ranks(y, t);
  std::int64_t s = 0;
  for (std::size_t k = 0; k < t; ++k) s += rx[k] * ry[k];
  return spearman_from_rank_products(s, 1, t);
}

double seq_quantile_dep(std::span<const double> x, std::span<const double> y, std::size_t t,
                        double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::LevelOutOfRange, "quantile level not in (0,1)");
  check_prefix(x, y, t);
  auto rx = prefix_ranks(x, t);
  auto ry = prefix_ranks(y, t);
  const std::int64_t m = level_threshold(q, t);
  return quantile_dep_from_count(joint_lower_count(rx, ry, m, m), 1, t, q);
}

std::size_t trim_start(double epsilon, std::size_t T) {
  auto s = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(T) - 1e-9));
  return std::max<std::size_t>(s, 1);
}

std::vector<std::size_t> make_grid(std::size_t T, double epsilon, std::size_t stride) {
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "grid stride must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::TrimTooSmall, "trimming fraction must lie in (0,1]");
  std::vector<std::size_t> grid;
  for (std::size_t t = trim_start(epsilon, T); t < T; t += stride) grid.push_back(t);
  grid.push_back(T);
  return grid;
}

void check_trim(const MeasureSpec& spec, double epsilon, std::size_t T) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::TrimTooSmall, "trimming fraction must lie in (0,1]");
  const auto tail_min = static_cast<std::size_t>(std::ceil(1.0 / spec.min_tail_mass() - 1e-9));
  const std::size_t need = std::max<std::size_t>(10, tail_min);
  const std::size_t start = trim_start(epsilon, T);
  if (start < need)
    throw Error(ErrorCode::TrimTooSmall, "first evaluation time ceil(eps*T) = " + std::to_string(start) +
                                             " is below the required " + std::to_string(need));
}

Matrix resolve_ties(const Matrix& residuals, TiePolicy policy, std::uint64_t seed) {
  Matrix out = residuals;
  for (std::size_t i = 0; i < out.cols(); ++i) {
    auto tied = tied_entries(out.col(i));
    if (tied.empty()) continue;
    if (policy == TiePolicy::Fail)
      throw Error(ErrorCode::TiesDetected, "column " + std::to_string(i) + " has " +
                                               std::to_string(tied.size()) + " tied entries");
    const double scale = 1e-10 * column_scale(out.col(i));
    Rng rng = make_stream(seed, {0x7469ULL, i});
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    auto col = out.col(i);
    for (std::size_t k : tied) col[k] += scale * jitter(rng);
    if (!tied_entries(out.col(i)).empty())
      throw Error(ErrorCode::TiesDetected, "jitter could not separate ties in column " + std::to_string(i));
  }
  return out;
}

DependencePath dependence_path(const Matrix& residuals, const MeasureSpec& spec,
                               const PathOptions& options) {
  const std::size_t T = residuals.rows();
  if (residuals.cols() < 2) throw Error(ErrorCode::TooFewColumns, "need at least two series");
  check_trim(spec, options.epsilon, T);
  Matrix clean = resolve_ties(residuals, options.ties, options.jitter_seed);

  DependencePath path;
  path.T = T;
  path.spec = spec;
  path.grid = make_grid(T, options.epsilon, options.stride);
  std::vector<double> buf(path.grid.size() * spec.size());
  PathKernel kernel(spec, residuals.cols());
  kernel.evaluate(rank_panel(clean), path.grid, buf);
  path.values = Matrix(path.grid.size(), spec.size());
  for (std::size_t r = 0; r < path.grid.size(); ++r)
    for (std::size_t s = 0; s < spec.size(); ++s) path.values(r, s) = buf[r * spec.size() + s];
  return path;
}

}  // namespace depbreak
