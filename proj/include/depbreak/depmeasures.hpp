#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "depbreak/matrix.hpp"
#include "depbreak/measure_spec.hpp"

namespace depbreak {

enum class TiePolicy {
  Fail,    // exact ties in an input column raise Error(TiesDetected)
  Jitter,  // tied entries get seeded jitter of 1e-10 x column scale
};

/// (1/t) * #{k < t : values[k] <= x}.
double seq_ecdf(std::span<const double> values, std::size_t t, double x);

/// Sequential empirical copula of the first t observations of (x, y) at (u, v).
/// Ranks are computed within the first t observations only.
double seq_copula(std::span<const double> x, std::span<const double> y, std::size_t t, double u,
                  double v);

/// Plug-in Spearman's rho over the first t observations:
/// (12/t) sum_k F_x(x_k) F_y(y_k) - 3.
double seq_spearman(std::span<const double> x, std::span<const double> y, std::size_t t);

/// Sample quantile dependence at level q: C_t(q,q)/q for q <= 0.5,
/// (1 - 2q + C_t(q,q))/(1-q) above.
double seq_quantile_dep(std::span<const double> x, std::span<const double> y, std::size_t t,
                        double q);

/// Measure values from integer sufficient statistics. Shared by every code path
/// so that single-pair and averaged evaluations agree bit-for-bit when N = 2.
double spearman_from_rank_products(std::int64_t rank_product_sum, std::int64_t pairs, std::size_t t);
double quantile_dep_from_count(std::int64_t joint_count, std::int64_t pairs, std::size_t t, double q);

/// Number of observations whose ecdf value is <= level at sample size t.
std::int64_t level_threshold(double level, std::size_t t);

struct PathOptions {
  double epsilon = 0.1;
  std::size_t stride = 1;
  TiePolicy ties = TiePolicy::Fail;
  std::uint64_t jitter_seed = 0;
};

/// Pair-averaged sequential measure vectors m_t evaluated on a grid of sample sizes.
struct DependencePath {
  std::vector<std::size_t> grid;  // increasing; grid.back() == T
  Matrix values;                  // grid.size() x spec.size(); row r is m_{grid[r]}
  std::size_t T = 0;
  MeasureSpec spec;

  std::span<const double> measure(std::size_t item) const { return values.col(item); }
  std::vector<double> at(std::size_t row) const { return values.row(row); }
};

/// First evaluation time ceil(epsilon*T).
std::size_t trim_start(double epsilon, std::size_t T);

/// {ceil(eps*T), +stride, ...} U {T}.
std::vector<std::size_t> make_grid(std::size_t T, double epsilon, std::size_t stride);

/// Throws TrimTooSmall unless ceil(eps*T) >= max(10, 1/min(q,1-q)).
void check_trim(const MeasureSpec& spec, double epsilon, std::size_t T);

/// Applies the tie policy to a residual matrix: returns it unchanged, jittered,
/// or throws TiesDetected naming the first tied column.
Matrix resolve_ties(const Matrix& residuals, TiePolicy policy, std::uint64_t seed);

DependencePath dependence_path(const Matrix& residuals, const MeasureSpec& spec,
                               const PathOptions& options = {});

}  // namespace depbreak
