#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depbreak/panel.hpp"
#include "depbreak/rng.hpp"

namespace depbreak {

enum class CopulaFamily { FactorSkewT, Clayton, Gumbel };

/// Data-generating process with an optional single step break in the copula
/// parameter: theta_pre for t <= floor(s0 T), theta_post afterwards.
struct DgpSpec {
  CopulaFamily family = CopulaFamily::FactorSkewT;
  double theta_pre = 1.0;
  double theta_post = 1.0;
  std::optional<double> break_fraction;
  double nu_inv = 0.25;       // factor family: inverse degrees of freedom
  double lambda_skew = 0.0;   // factor family: Hansen skewness
  std::size_t T = 1000;
  std::size_t N = 10;

  /// Checks the family-specific parameter domains.
  void validate() const;
  /// Last time index (1-based) governed by theta_pre.
  std::size_t break_index() const;
  double theta_at(std::size_t t) const { return t <= break_index() ? theta_pre : theta_post; }
  std::string to_string() const;
};

/// "factor:nu_inv=0.25,lambda=-0.5,theta0=1,theta1=1.5,s0=0.5",
/// "clayton:theta0=2.5,theta1=3.5,s0=0.5", "gumbel:theta0=2". Optional keys
/// T and N. Without s0 there is no break and theta1 is ignored.
DgpSpec parse_dgp(std::string_view text);

/// Hansen's skewed t with nu > 2 degrees of freedom and skewness lambda in (-1,1),
/// standardized to zero mean and unit variance.
class HansenSkewT {
 public:
  HansenSkewT(double nu, double lambda);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

  double pdf(double z) const;
  double cdf(double z) const;
  double quantile(double u) const;

  /// Inverse-transform draw.
  double operator()(Rng& rng) const;

 private:
  double nu_, lambda_, a_, b_, c_;
  double std_scale_;  // sqrt((nu - 2) / nu)
};

std::vector<double> sample_hansen_skewt(double nu, double lambda, std::size_t n, Rng& rng);

/// eta_it = theta_t Z_t + q_it with Z_t Hansen skew-t(nu, lambda) shared across
/// series and q_it i.i.d. Student-t(nu), nu = 1 / nu_inv.
ResidualPanel sample_factor_panel(const DgpSpec& spec, Rng& rng);

/// Exchangeable Clayton copula via gamma frailty; values in (0,1).
ResidualPanel sample_clayton_panel(const DgpSpec& spec, Rng& rng);

/// Exchangeable Gumbel copula via positive-stable frailty; values in (0,1).
ResidualPanel sample_gumbel_panel(const DgpSpec& spec, Rng& rng);

/// Dispatch on spec.family.
ResidualPanel simulate_panel(const DgpSpec& spec, Rng& rng);

enum class PopulationFamily { Clayton, Gumbel, Independence, Comonotone };

/// Closed-form quantile dependence: C(q,q)/q for q <= 0.5, (1 - 2q + C(q,q))/(1-q) above.
double population_quantile_dep(PopulationFamily family, double theta, double q);
/// Family by name ("clayton", "gumbel", "independence", "comonotone");
/// anything else throws UnsupportedFamily.
double population_quantile_dep(std::string_view family, double theta, double q);

}  // namespace depbreak
