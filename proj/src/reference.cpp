#include "depbreak/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depbreak/error.hpp"
#include "depbreak/rng.hpp"

namespace depbreak::reference {
namespace {

std::vector<std::int64_t> prefix_ranks(std::span<const double> col, std::size_t t) {
  std::vector<double> sorted(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(t));
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::int64_t> r(t);
  for (std::size_t k = 0; k < t; ++k)
    r[k] = std::upper_bound(sorted.begin(), sorted.end(), col[k]) - sorted.begin();
  return r;
}

}  // namespace

DependencePath dependence_path(const Matrix& values, const MeasureSpec& spec, double epsilon,
                               std::size_t stride) {
  const std::size_t T = values.rows(), N = values.cols();
  if (N < 2) throw Error(ErrorCode::TooFewColumns, "need at least two series");
  DependencePath path;
  path.T = T;
  path.spec = spec;
  path.grid = make_grid(T, epsilon, stride);
  path.values = Matrix(path.grid.size(), spec.size());
  const double pairs = static_cast<double>(N * (N - 1) / 2);
  for (std::size_t g = 0; g < path.grid.size(); ++g) {
    const std::size_t t = path.grid[g];
    std::vector<std::vector<std::int64_t>> ranks;
    for (std::size_t i = 0; i < N; ++i) ranks.push_back(prefix_ranks(values.col(i), t));
    for (std::size_t m = 0; m < spec.size(); ++m) {
      double sum = 0.0;
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
          if (spec[m].is_rho()) {
            std::int64_t s = 0;
            for (std::size_t k = 0; k < t; ++k) s += ranks[i][k] * ranks[j][k];
            sum += spearman_from_rank_products(s, 1, t);
          } else {
            const std::int64_t lim = level_threshold(spec[m].level, t);
            std::int64_t c = 0;
            for (std::size_t k = 0; k < t; ++k) c += ranks[i][k] <= lim && ranks[j][k] <= lim;
            sum += quantile_dep_from_count(c, 1, t, spec[m].level);
          }
        }
      path.values(g, m) = sum / pairs;
    }
  }
  return path;
}

// Replaces each column by its ranks, ties broken by row position.
static Matrix untie_by_position(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  std::vector<std::size_t> idx(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m(a, c) < m(b, c); });
    for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k], c) = static_cast<double>(k);
  }
  return out;
}

std::vector<double> bootstrap_replicates(const Matrix& residuals, const MeasureSpec& spec,
                                         const BootstrapConfig& config) {
  const std::size_t T = residuals.rows();
  const DependencePath original = dependence_path(residuals, spec, config.epsilon, config.stride);
  const std::size_t last = original.grid.size() - 1;
  const double root_T = std::sqrt(static_cast<double>(T));
  std::vector<double> out;
  std::vector<std::size_t> rows(T);
  for (std::size_t p = 0; p < config.B; ++p) {
    Rng rng = make_stream(config.seed, {p});
    std::uniform_int_distribution<std::size_t> pick(0, T - 1);
    for (auto& r : rows) r = pick(rng);
    const DependencePath boot = dependence_path(untie_by_position(residuals.gather_rows(rows)), spec, config.epsilon, config.stride);
    double best = 0.0;
    for (std::size_t g = 0; g < boot.grid.size(); ++g) {
      const double s = static_cast<double>(boot.grid[g]) / static_cast<double>(T);
      double ss = 0.0;
      for (std::size_t m = 0; m < spec.size(); ++m) {
        const double a_t = s * root_T * (boot.values(g, m) - original.values(last, m));
        const double a_1 = root_T * (boot.values(last, m) - original.values(last, m));
        ss += (a_t - s * a_1) * (a_t - s * a_1);
      }
      best = std::max(best, ss);
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace depbreak::reference
