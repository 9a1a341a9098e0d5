#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "depbreak/panel.hpp"

namespace depbreak {

enum class MarginalMode { Ar1Garch11, None };

/// "ar1-garch11" or "none".
MarginalMode parse_marginal_mode(std::string_view text);
std::string_view to_string(MarginalMode mode);

/// Gaussian QMLE of Y_t = alpha + beta Y_{t-1} + eps_t,
/// sigma_t^2 = gamma0 + gamma1 sigma_{t-1}^2 + gamma2 eps_{t-1}^2 over t = 2..T,
/// with sigma_2^2 fixed at the OLS AR(1) residual variance. BFGS over
/// unconstrained coordinates; stops at gradient norm < 1e-6 or 500 iterations.
/// On non-convergence the best iterate is returned with converged = false.
MarginalFit fit_ar1_garch11(std::span<const double> series);

/// Quasi-log-likelihood of the given parameters (sigma2_start included).
double ar1_garch11_loglik(std::span<const double> series, const MarginalFit& params);

/// Conditional standard deviations sigma_t, t = 2..T.
std::vector<double> ar1_garch11_sigma_path(std::span<const double> series, const MarginalFit& params);

/// eta_t = (Y_t - alpha - beta Y_{t-1}) / sigma_t, t = 2..T.
std::vector<double> ar1_garch11_residuals(std::span<const double> series, const MarginalFit& fit);

/// Y_1 = y1 and Y_t = alpha + beta Y_{t-1} + sigma_t eta_t for t = 2..T with
/// sigma_2^2 = params.sigma2_start; eta has length T - 1.
std::vector<double> simulate_ar1_garch11(const MarginalFit& params, std::span<const double> eta, double y1);

/// Per-column filtering. Mode None passes values through with no fits; the
/// GARCH mode drops the first row (T' = T - 1) and needs T >= 50.
ResidualPanel filter_panel(const ReturnPanel& panel, MarginalMode mode);

}  // namespace depbreak
