#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "depbreak/matrix.hpp"
#include "depbreak/measure_spec.hpp"

namespace depbreak {

/// Column-major integer ranks of a T x N panel. Equal values share a rank;
/// only the order of ranks within a column matters downstream.
struct RankPanel {
  std::size_t T = 0;
  std::size_t N = 0;
  std::size_t domain = 0;            // ranks lie in [0, domain)
  std::vector<std::int32_t> ranks;   // ranks[i * T + k]

  std::span<const std::int32_t> col(std::size_t i) const { return {ranks.data() + i * T, T}; }
};

/// Ranks by "number of strictly smaller values" per column.
RankPanel rank_panel(const Matrix& values);

/// How duplicated rows of a resample are ranked.
enum class ResampleTies {
  Keep,       // duplicates share their source rank (ties)
  DrawOrder,  // re-ranked to [0, rows.size()), duplicates ordered by draw position
};

/// Row-gather of a rank panel.
void gather_rows(const RankPanel& source, std::span<const std::size_t> rows, RankPanel& out,
                 ResampleTies ties);

/// Incremental evaluator of the pair-averaged measure path.
///
/// Observations are added one at a time. Spearman's rho needs, per pair, the
/// sum of rank products; averaged over pairs this is
///   sum_k ((sum_i R_ik)^2 - sum_i R_ik^2) / 2,
/// which costs O(N t) per step. A quantile level needs the number of
/// observations that sit below the level in two columns at once; with c_k the
/// number of columns in which observation k is in the lower orthant, the pair
/// total is sum_k c_k (c_k - 1) / 2. The lower-orthant set of a column changes
/// by O(1) elements per step and is tracked with a Fenwick tree over ranks.
///
/// A kernel instance is a reusable workspace: not thread-safe, one per worker.
class PathKernel {
 public:
  PathKernel(const MeasureSpec& spec, std::size_t N);

  /// Evaluates m_t for t in grid (1-based sample sizes, increasing, last <= T).
  /// `out` is row-major grid.size() x spec.size().
  void evaluate(const RankPanel& panel, std::span<const std::size_t> grid, std::span<double> out);

  const MeasureSpec& spec() const noexcept { return spec_; }

 private:
  void reset(const RankPanel& panel);
  void add_rho(const RankPanel& panel, std::size_t k);
  void add_quantiles(const RankPanel& panel, std::size_t k);
  void emit(std::size_t n, std::span<double> row) const;

  MeasureSpec spec_;
  std::size_t N_;
  std::int64_t pairs_;
  bool has_rho_ = false;
  std::vector<std::size_t> rho_slots_;
  std::vector<std::size_t> q_slots_;
  std::vector<double> q_levels_;

  // rho state
  std::vector<std::int32_t> R_;   // N x T running ranks
  std::vector<std::int32_t> U_;   // row sums of R
  std::int64_t rank_sq_sum_ = 0;  // sum_i sum_k R_ik^2

  // quantile state
  std::size_t domain_ = 0;
  std::vector<std::int32_t> fenwick_;      // N x (domain + 1)
  std::vector<std::int32_t> occ_start_;    // N x (domain + 1)
  std::vector<std::int32_t> occ_times_;    // N x T
  std::vector<std::int32_t> bound_;        // nq x N: values < bound are in the orthant
  std::vector<std::int32_t> count_;        // nq x T: c_k
  std::vector<std::int64_t> joint_;        // nq: sum_k c_k (c_k - 1) / 2
};

}  // namespace depbreak
