#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "depbreak/date.hpp"
#include "depbreak/matrix.hpp"

namespace depbreak {

/// Dated T x N panel of returns or prices. Simulated panels carry no dates.
struct ReturnPanel {
  std::vector<Date> dates;          // empty or length T, strictly increasing
  std::vector<std::string> names;   // length N
  Matrix values;                    // T x N, finite

  std::size_t T() const noexcept { return values.rows(); }
  std::size_t N() const noexcept { return values.cols(); }
};

/// Fitted AR(1)-GARCH(1,1) marginal: Y_t = alpha + beta Y_{t-1} + sigma_t eta_t,
/// sigma_t^2 = gamma0 + gamma1 sigma_{t-1}^2 + gamma2 (sigma_{t-1} eta_{t-1})^2.
struct MarginalFit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double sigma2_start = 0.0;        // sigma_2^2, the OLS residual variance
  std::vector<double> sigma_path;   // sigma_t for t = 2..T
  double loglik = 0.0;
  double initial_loglik = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Standardized residuals. `fits` is empty when filtering was bypassed.
struct ResidualPanel {
  std::vector<Date> dates;
  std::vector<std::string> names;
  Matrix values;
  std::vector<MarginalFit> fits;

  std::size_t T() const noexcept { return values.rows(); }
  std::size_t N() const noexcept { return values.cols(); }
};

/// Default column labels "x1".."xN" for simulated data.
std::vector<std::string> default_names(std::size_t N);

}  // namespace depbreak
