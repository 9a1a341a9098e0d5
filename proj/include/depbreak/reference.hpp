#pragma once

#include <vector>

#include "depbreak/bootstrap.hpp"
#include "depbreak/depmeasures.hpp"

namespace depbreak::reference {

// Straightforward serial implementations: each pair, each t, ranks recomputed
// from scratch. Slow; kept to cross-check the incremental kernels and as the
// baseline in the benchmark.

/// Pair-averaged path with ranks "count of <=" within the first t rows, so
/// tied rows (from resampling) are handled like the kernel does.
DependencePath dependence_path(const Matrix& values, const MeasureSpec& spec, double epsilon,
                               std::size_t stride = 1);

/// Bootstrap K^(1..B) with the same replicate streams as the library, computed
/// one replicate after another with the reference path.
std::vector<double> bootstrap_replicates(const Matrix& residuals, const MeasureSpec& spec,
                                         const BootstrapConfig& config);

}  // namespace depbreak::reference
