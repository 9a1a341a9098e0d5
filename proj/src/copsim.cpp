#include "depbreak/copsim.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "depbreak/error.hpp"

namespace depbreak {
namespace {

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(ErrorCode::ParseError, "bad value '" + std::string(text) + "' for DGP key " + std::string(key));
  return v;
}

double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  while (x <= 0.0) x = u(rng);
  return x;
}

ResidualPanel empty_panel(const DgpSpec& spec) {
  ResidualPanel p;
  p.values = Matrix(spec.T, spec.N);
  p.names = default_names(spec.N);
  return p;
}

}  // namespace

std::vector<std::string> default_names(std::size_t N) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < N; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

void DgpSpec::validate() const {
  if (T < 2 || N < 2) throw Error(ErrorCode::InvalidArgument, "DGP needs T >= 2 and N >= 2");
  if (break_fraction && !(*break_fraction > 0.0 && *break_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "break fraction must lie in (0,1)");
  auto check = [&](double theta) {
    switch (family) {
      case CopulaFamily::Clayton:
        if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Clayton needs theta > 0");
        break;
      case CopulaFamily::Gumbel:
        if (!(theta >= 1.0)) throw Error(ErrorCode::InvalidArgument, "Gumbel needs theta >= 1");
        break;
      case CopulaFamily::FactorSkewT:
        if (!std::isfinite(theta)) throw Error(ErrorCode::InvalidArgument, "factor loading must be finite");
        break;
    }
  };
  check(theta_pre);
  if (break_fraction) check(theta_post);
  if (family == CopulaFamily::FactorSkewT) {
    if (!(nu_inv > 0.0 && nu_inv < 0.5)) throw Error(ErrorCode::InvalidArgument, "nu_inv must lie in (0, 0.5)");
    if (!(lambda_skew > -1.0 && lambda_skew < 1.0))
      throw Error(ErrorCode::InvalidArgument, "skewness must lie in (-1,1)");
  }
}

std::size_t DgpSpec::break_index() const {
  if (!break_fraction) return T;
  return static_cast<std::size_t>(std::floor(*break_fraction * static_cast<double>(T) + 1e-9));
}

std::string DgpSpec::to_string() const {
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::string s;
  switch (family) {
    case CopulaFamily::FactorSkewT:
      s = "factor:nu_inv=" + num(nu_inv) + ",lambda=" + num(lambda_skew) + ",";
      break;
    case CopulaFamily::Clayton: s = "clayton:"; break;
    case CopulaFamily::Gumbel: s = "gumbel:"; break;
  }
  s += "theta0=" + num(theta_pre);
  if (break_fraction) s += ",theta1=" + num(theta_post) + ",s0=" + num(*break_fraction);
  s += ",T=" + std::to_string(T) + ",N=" + std::to_string(N);
  return s;
}

DgpSpec parse_dgp(std::string_view text) {
  DgpSpec spec;
  auto colon = text.find(':');
  std::string_view family = text.substr(0, colon);
  if (family == "factor")
    spec.family = CopulaFamily::FactorSkewT;
  else if (family == "clayton")
    spec.family = CopulaFamily::Clayton, spec.theta_pre = spec.theta_post = 2.5;
  else if (family == "gumbel")
    spec.family = CopulaFamily::Gumbel, spec.theta_pre = spec.theta_post = 2.0;
  else
    throw Error(ErrorCode::UnsupportedFamily, "unknown DGP family '" + std::string(family) + "'");

  bool has_theta1 = false;
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view kv = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError, "expected key=value in DGP spec, got '" + std::string(kv) + "'");
    std::string_view key = kv.substr(0, eq), val = kv.substr(eq + 1);
    double v = parse_number(key, val);
    if (key == "nu_inv") spec.nu_inv = v;
    else if (key == "lambda") spec.lambda_skew = v;
    else if (key == "theta0") spec.theta_pre = v;
    else if (key == "theta1") spec.theta_post = v, has_theta1 = true;
    else if (key == "s0") spec.break_fraction = v;
    else if (key == "T") spec.T = static_cast<std::size_t>(v);
    else if (key == "N") spec.N = static_cast<std::size_t>(v);
    else throw Error(ErrorCode::ParseError, "unknown DGP key '" + std::string(key) + "'");
  }
  if (!has_theta1) spec.theta_post = spec.theta_pre;
  spec.validate();
  return spec;
}

HansenSkewT::HansenSkewT(double nu, double lambda) : nu_(nu), lambda_(lambda) {
  if (!(nu > 2.0)) throw Error(ErrorCode::InvalidArgument, "skew-t needs nu > 2");
  if (!(lambda > -1.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidArgument, "skew-t needs lambda in (-1,1)");
  c_ = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) / std::sqrt(std::numbers::pi * (nu - 2.0));
  a_ = 4.0 * lambda * c_ * (nu - 2.0) / (nu - 1.0);
  b_ = std::sqrt(1.0 + 3.0 * lambda * lambda - a_ * a_);
  std_scale_ = std::sqrt((nu - 2.0) / nu);
}

double HansenSkewT::pdf(double z) const {
  const double side = z < -a_ / b_ ? 1.0 - lambda_ : 1.0 + lambda_;
  const double w = (b_ * z + a_) / side;
  return b_ * c_ * std::pow(1.0 + w * w / (nu_ - 2.0), -(nu_ + 1.0) / 2.0);
}

// With w the side-scaled variable, the density is b * f(w) where f is the
// unit-variance Student-t density, so G(z) = (1 - lambda) F(w) on the left of
// the mode and (1 - lambda)/2 + (1 + lambda)(F(w) - 1/2) on the right.
double HansenSkewT::cdf(double z) const {
  boost::math::students_t dist(nu_);
  if (z < -a_ / b_) {
    const double w = (b_ * z + a_) / (1.0 - lambda_);
    return (1.0 - lambda_) * boost::math::cdf(dist, w / std_scale_);
  }
  const double w = (b_ * z + a_) / (1.0 + lambda_);
  return (1.0 - lambda_) / 2.0 + (1.0 + lambda_) * (boost::math::cdf(dist, w / std_scale_) - 0.5);
}

double HansenSkewT::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0,1)");
  boost::math::students_t dist(nu_);
  const double split = (1.0 - lambda_) / 2.0;
  if (u < split) {
    const double w = std_scale_ * boost::math::quantile(dist, u / (1.0 - lambda_));
    return ((1.0 - lambda_) * w - a_) / b_;
  }
  const double w = std_scale_ * boost::math::quantile(dist, 0.5 + (u - split) / (1.0 + lambda_));
  return ((1.0 + lambda_) * w - a_) / b_;
}

double HansenSkewT::operator()(Rng& rng) const { return quantile(open_uniform(rng)); }

std::vector<double> sample_hansen_skewt(double nu, double lambda, std::size_t n, Rng& rng) {
  HansenSkewT dist(nu, lambda);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

ResidualPanel sample_factor_panel(const DgpSpec& spec, Rng& rng) {
  if (spec.family != CopulaFamily::FactorSkewT)
    throw Error(ErrorCode::InvalidArgument, "factor sampler called with another family");
  spec.validate();
  const double nu = 1.0 / spec.nu_inv;
  HansenSkewT common(nu, spec.lambda_skew);
  std::student_t_distribution<double> idio(nu);
  ResidualPanel p = empty_panel(spec);
  for (std::size_t r = 0; r < spec.T; ++r) {
    const double theta = spec.theta_at(r + 1);
    const double z = common(rng);
    for (std::size_t i = 0; i < spec.N; ++i) p.values(r, i) = theta * z + idio(rng);
  }
  return p;
}

ResidualPanel sample_clayton_panel(const DgpSpec& spec, Rng& rng) {
  if (spec.family != CopulaFamily::Clayton)
    throw Error(ErrorCode::InvalidArgument, "Clayton sampler called with another family");
  spec.validate();
  std::exponential_distribution<double> expo(1.0);
  ResidualPanel p = empty_panel(spec);
  for (std::size_t r = 0; r < spec.T; ++r) {
    const double theta = spec.theta_at(r + 1);
    std::gamma_distribution<double> frailty(1.0 / theta, 1.0);
    const double v = frailty(rng);
    for (std::size_t i = 0; i < spec.N; ++i)
      p.values(r, i) = std::exp(-std::log1p(expo(rng) / v) / theta);
  }
  return p;
}

ResidualPanel sample_gumbel_panel(const DgpSpec& spec, Rng& rng) {
  if (spec.family != CopulaFamily::Gumbel)
    throw Error(ErrorCode::InvalidArgument, "Gumbel sampler called with another family");
  spec.validate();
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  ResidualPanel p = empty_panel(spec);
  for (std::size_t r = 0; r < spec.T; ++r) {
    const double theta = spec.theta_at(r + 1);
    const double a = 1.0 / theta;
    // Kanter's representation of the positive stable law with Laplace
    // transform exp(-s^a); degenerate at 1 when a == 1.
    double v = 1.0;
    const double th = angle(rng);
    const double w = expo(rng);
    if (a < 1.0)
      v = std::sin(a * th) / std::pow(std::sin(th), 1.0 / a) *
          std::pow(std::sin((1.0 - a) * th) / w, (1.0 - a) / a);
    for (std::size_t i = 0; i < spec.N; ++i) p.values(r, i) = std::exp(-std::pow(expo(rng) / v, a));
  }
  return p;
}

ResidualPanel simulate_panel(const DgpSpec& spec, Rng& rng) {
  switch (spec.family) {
    case CopulaFamily::FactorSkewT: return sample_factor_panel(spec, rng);
    case CopulaFamily::Clayton: return sample_clayton_panel(spec, rng);
    case CopulaFamily::Gumbel: return sample_gumbel_panel(spec, rng);
  }
  throw Error(ErrorCode::UnsupportedFamily, "unknown family");
}

double population_quantile_dep(PopulationFamily family, double theta, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::LevelOutOfRange, "quantile level not in (0,1)");
  double c = 0.0;
  switch (family) {
    case PopulationFamily::Clayton:
      if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Clayton needs theta > 0");
      c = std::pow(2.0 * std::pow(q, -theta) - 1.0, -1.0 / theta);
      break;
    case PopulationFamily::Gumbel:
      if (!(theta >= 1.0)) throw Error(ErrorCode::InvalidArgument, "Gumbel needs theta >= 1");
      c = std::pow(q, std::pow(2.0, 1.0 / theta));
      break;
    case PopulationFamily::Independence: c = q * q; break;
    case PopulationFamily::Comonotone: c = q; break;
  }
  return q <= 0.5 ? c / q : (1.0 - 2.0 * q + c) / (1.0 - q);
}

double population_quantile_dep(std::string_view family, double theta, double q) {
  if (family == "clayton") return population_quantile_dep(PopulationFamily::Clayton, theta, q);
  if (family == "gumbel") return population_quantile_dep(PopulationFamily::Gumbel, theta, q);
  if (family == "independence") return population_quantile_dep(PopulationFamily::Independence, theta, q);
  if (family == "comonotone") return population_quantile_dep(PopulationFamily::Comonotone, theta, q);
  throw Error(ErrorCode::UnsupportedFamily, "no closed-form copula for family '" + std::string(family) + "'");
}

}  // namespace depbreak
