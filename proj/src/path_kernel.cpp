#include "depbreak/path_kernel.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "depbreak/depmeasures.hpp"
#include "depbreak/error.hpp"

namespace depbreak {

RankPanel rank_panel(const Matrix& values) {
  RankPanel out;
  out.T = values.rows();
  out.N = values.cols();
  out.domain = out.T;
  out.ranks.resize(out.T * out.N);
  std::vector<std::size_t> order(out.T);
  for (std::size_t i = 0; i < out.N; ++i) {
    auto col = values.col(i);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    std::int32_t* dst = out.ranks.data() + i * out.T;
    for (std::size_t pos = 0; pos < out.T; ++pos) {
      std::size_t k = order[pos];
      if (pos > 0 && col[k] == col[order[pos - 1]])
        dst[k] = dst[order[pos - 1]];
      else
        dst[k] = static_cast<std::int32_t>(pos);
    }
  }
  return out;
}

void gather_rows(const RankPanel& source, std::span<const std::size_t> rows, RankPanel& out,
                 ResampleTies ties) {
  out.T = rows.size();
  out.N = source.N;
  out.ranks.resize(out.T * out.N);
  if (ties == ResampleTies::Keep) {
    out.domain = source.domain;
    for (std::size_t i = 0; i < out.N; ++i) {
      const std::int32_t* src = source.ranks.data() + i * source.T;
      std::int32_t* dst = out.ranks.data() + i * out.T;
      for (std::size_t k = 0; k < out.T; ++k) dst[k] = src[rows[k]];
    }
    return;
  }
  out.domain = out.T;
  std::vector<std::size_t> next(source.domain + 1);
  for (std::size_t i = 0; i < out.N; ++i) {
    const std::int32_t* src = source.ranks.data() + i * source.T;
    std::int32_t* dst = out.ranks.data() + i * out.T;
    // Counting sort on the source rank, stable in draw order.
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t k = 0; k < out.T; ++k) ++next[static_cast<std::size_t>(src[rows[k]]) + 1];
    for (std::size_t v = 1; v < next.size(); ++v) next[v] += next[v - 1];
    for (std::size_t k = 0; k < out.T; ++k) dst[k] = static_cast<std::int32_t>(next[static_cast<std::size_t>(src[rows[k]])]++);
  }
}

PathKernel::PathKernel(const MeasureSpec& spec, std::size_t N)
    : spec_(spec), N_(N), pairs_(static_cast<std::int64_t>(N) * (static_cast<std::int64_t>(N) - 1) / 2) {
  if (N < 2) throw Error(ErrorCode::TooFewColumns, "dependence path needs at least two series");
  for (std::size_t s = 0; s < spec.size(); ++s) {
    if (spec[s].is_rho()) {
      has_rho_ = true;
      rho_slots_.push_back(s);
    } else {
      q_slots_.push_back(s);
      q_levels_.push_back(spec[s].level);
    }
  }
}

void PathKernel::reset(const RankPanel& panel) {
  const std::size_t T = panel.T;
  if (has_rho_) {
    R_.assign(N_ * T, 0);
    U_.assign(T, 0);
    rank_sq_sum_ = 0;
  }
  if (!q_levels_.empty()) {
    const std::size_t nq = q_levels_.size();
    domain_ = panel.domain;
    const std::size_t stride = domain_ + 1;
    fenwick_.assign(N_ * stride, 0);
    occ_start_.assign(N_ * stride, 0);
    occ_times_.resize(N_ * T);
    for (std::size_t i = 0; i < N_; ++i) {
      auto g = panel.col(i);
      std::int32_t* start = occ_start_.data() + i * stride;
      for (std::size_t k = 0; k < T; ++k) ++start[g[k] + 1];
      for (std::size_t v = 0; v < domain_; ++v) start[v + 1] += start[v];
      std::vector<std::int32_t> fill(start, start + domain_);
      std::int32_t* times = occ_times_.data() + i * T;
      for (std::size_t k = 0; k < T; ++k) times[fill[g[k]]++] = static_cast<std::int32_t>(k);
    }
    bound_.assign(nq * N_, 0);
    count_.assign(nq * T, 0);
    joint_.assign(nq, 0);
  }
}

void PathKernel::add_rho(const RankPanel& panel, std::size_t k) {
  const std::size_t T = panel.T;
  std::int32_t* U = U_.data();
  U[k] = 0;
  for (std::size_t i = 0; i < N_; ++i) {
    const std::int32_t* g = panel.ranks.data() + i * T;
    std::int32_t* R = R_.data() + i * T;
    const std::int32_t w = g[k];
    std::int64_t sq = 0;
    std::int32_t le = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::int32_t inc = g[j] >= w;
      le += g[j] <= w;
      sq += inc * (2 * R[j] + 1);
      R[j] += inc;
      U[j] += inc;
    }
    R[k] = le + 1;
    sq += static_cast<std::int64_t>(R[k]) * R[k];
    U[k] += R[k];
    rank_sq_sum_ += sq;
  }
}

void PathKernel::add_quantiles(const RankPanel& panel, std::size_t k) {
  const std::size_t T = panel.T;
  const std::size_t n = k + 1;
  const std::size_t stride = domain_ + 1;
  const std::size_t nq = q_levels_.size();
  const std::size_t top = std::bit_floor(domain_);

  for (std::size_t i = 0; i < N_; ++i) {
    const std::int32_t* g = panel.ranks.data() + i * T;
    std::int32_t* tree = fenwick_.data() + i * stride;
    const std::int32_t* start = occ_start_.data() + i * stride;
    const std::int32_t* times = occ_times_.data() + i * T;
    const std::int32_t w = g[k];
    for (std::size_t p = static_cast<std::size_t>(w) + 1; p <= domain_; p += p & (~p + 1)) ++tree[p];

    for (std::size_t j = 0; j < nq; ++j) {
      const std::int64_t m = level_threshold(q_levels_[j], n);
      // Largest prefix of the value domain holding at most m observations.
      std::size_t pos = 0;
      std::int64_t rem = m;
      for (std::size_t step = top; step > 0; step >>= 1) {
        if (pos + step <= domain_ && tree[pos + step] <= rem) {
          pos += step;
          rem -= tree[pos];
        }
      }
      const auto nb = static_cast<std::int32_t>(pos);
      std::int32_t& ob = bound_[j * N_ + i];
      std::int32_t* c = count_.data() + j * T;
      std::int64_t& joint = joint_[j];
      if (w < nb) joint += c[k]++;
      if (nb > ob) {
        for (std::int32_t v = ob; v < nb; ++v)
          for (std::int32_t e = start[v]; e < start[v + 1]; ++e) {
            const std::int32_t tau = times[e];
            if (tau >= static_cast<std::int32_t>(k)) break;
            joint += c[tau]++;
          }
      } else if (nb < ob) {
        for (std::int32_t v = nb; v < ob; ++v)
          for (std::int32_t e = start[v]; e < start[v + 1]; ++e) {
            const std::int32_t tau = times[e];
            if (tau >= static_cast<std::int32_t>(k)) break;
            joint -= --c[tau];
          }
      }
      ob = nb;
    }
  }
}

void PathKernel::emit(std::size_t n, std::span<double> row) const {
  if (has_rho_) {
    std::int64_t usq = 0;
    const std::int32_t* U = U_.data();
    for (std::size_t k = 0; k < n; ++k) usq += static_cast<std::int64_t>(U[k]) * U[k];
    const std::int64_t products = (usq - rank_sq_sum_) / 2;
    for (std::size_t s : rho_slots_) row[s] = spearman_from_rank_products(products, pairs_, n);
  }
  for (std::size_t j = 0; j < q_levels_.size(); ++j)
    row[q_slots_[j]] = quantile_dep_from_count(joint_[j], pairs_, n, q_levels_[j]);
}

void PathKernel::evaluate(const RankPanel& panel, std::span<const std::size_t> grid,
                          std::span<double> out) {
  if (panel.N != N_) throw Error(ErrorCode::InvalidArgument, "rank panel width does not match kernel");
  if (grid.empty()) return;
  if (grid.back() > panel.T) throw Error(ErrorCode::InvalidArgument, "grid exceeds sample size");
  const std::size_t d = spec_.size();
  if (out.size() < grid.size() * d) throw Error(ErrorCode::InvalidArgument, "output buffer too small");

  reset(panel);
  std::size_t next = 0;
  for (std::size_t k = 0; k < grid.back(); ++k) {
    if (has_rho_) add_rho(panel, k);
    if (!q_levels_.empty()) add_quantiles(panel, k);
    while (next < grid.size() && grid[next] == k + 1) {
      emit(k + 1, out.subspan(next * d, d));
      ++next;
    }
  }
}

}  // namespace depbreak
