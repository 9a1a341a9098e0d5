#include "depbreak/cusum.hpp"

#include "depbreak/error.hpp"

namespace depbreak {
namespace {

void check_path(std::span<const std::size_t> grid, std::span<const double> values, std::size_t d,
                std::size_t T) {
  if (grid.empty() || d == 0) throw Error(ErrorCode::EmptyPath, "dependence path has no grid points");
  if (grid.back() != T) throw Error(ErrorCode::InvalidArgument, "last grid point must equal T");
  if (values.size() != grid.size() * d)
    throw Error(ErrorCode::InvalidArgument, "path values do not match grid and measure count");
}

inline double objective(std::size_t t, std::size_t T, const double* m_t, const double* m_T, std::size_t d) {
  double ss = 0.0;
  for (std::size_t s = 0; s < d; ++s) {
    const double diff = m_t[s] - m_T[s];
    ss += diff * diff;
  }
  const double frac = static_cast<double>(t) / static_cast<double>(T);
  return frac * frac * static_cast<double>(T) * ss;
}

}  // namespace

CusumResult cusum_statistic(std::span<const std::size_t> grid, std::span<const double> values,
                            std::size_t d, std::size_t T) {
  check_path(grid, values, d, T);
  CusumResult res;
  res.grid.assign(grid.begin(), grid.end());
  res.profile.resize(grid.size());
  const double* m_T = values.data() + (grid.size() - 1) * d;
  std::size_t best = 0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    res.profile[r] = objective(grid[r], T, values.data() + r * d, m_T, d);
    if (res.profile[r] > res.profile[best]) best = r;
  }
  res.statistic = res.profile[best];
  res.k_hat = grid[best];
  res.s_hat = static_cast<double>(grid[best]) / static_cast<double>(T);
  return res;
}

CusumResult cusum_statistic(const DependencePath& path) {
  // The path matrix is column-major; the raw routine wants rows.
  const std::size_t d = path.spec.size();
  std::vector<double> rows(path.grid.size() * d);
  for (std::size_t r = 0; r < path.grid.size(); ++r)
    for (std::size_t s = 0; s < d; ++s) rows[r * d + s] = path.values(r, s);
  return cusum_statistic(path.grid, rows, d, path.T);
}

std::size_t cusum_argmax(std::span<const std::size_t> grid, std::span<const double> values,
                         std::size_t d, std::size_t T) {
  check_path(grid, values, d, T);
  const double* m_T = values.data() + (grid.size() - 1) * d;
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const double v = objective(grid[r], T, values.data() + r * d, m_T, d);
    if (v > best_val) {
      best_val = v;
      best = r;
    }
  }
  return grid[best];
}

}  // namespace depbreak
