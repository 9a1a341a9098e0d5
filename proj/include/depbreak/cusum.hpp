#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "depbreak/depmeasures.hpp"

namespace depbreak {

struct CusumResult {
  double statistic = 0.0;          // M_T
  double s_hat = 0.0;              // argmax t / T
  std::size_t k_hat = 0;           // argmax t, i.e. floor(s_hat * T)
  std::vector<std::size_t> grid;
  std::vector<double> profile;     // (t/T)^2 T |m_t - m_T|^2 per grid point
};

/// M_T = max over the grid of (t/T)^2 T |m_t - m_T|^2. The argmax is the
/// smallest maximizing t.
CusumResult cusum_statistic(const DependencePath& path);

/// Same computation over raw buffers: `values` is row-major grid.size() x d and
/// its last row is m_T. Used by the bootstrap loops to avoid copies.
CusumResult cusum_statistic(std::span<const std::size_t> grid, std::span<const double> values,
                            std::size_t d, std::size_t T);

/// Only the location of the maximum; no profile allocation.
std::size_t cusum_argmax(std::span<const std::size_t> grid, std::span<const double> values,
                         std::size_t d, std::size_t T);

}  // namespace depbreak
