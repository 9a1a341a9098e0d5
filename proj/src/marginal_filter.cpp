#include "depbreak/marginal_filter.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>

#include <omp.h>

#include "depbreak/error.hpp"

namespace depbreak {
namespace {

constexpr std::size_t kMinLength = 50;
constexpr int kMaxIterations = 500;
constexpr double kGradTol = 1e-6;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

using Vec = std::array<double, 5>;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Natural {
  double mu, beta, gamma0, gamma1, gamma2;
};

// theta = (mu, atanh beta, log gamma0, logit(gamma1 + gamma2), logit(gamma1 / (gamma1 + gamma2)))
Natural to_natural(const Vec& th) {
  const double s = logistic(th[3]), w = logistic(th[4]);
  return {th[0], std::tanh(th[1]), std::exp(th[2]), s * w, s * (1.0 - w)};
}

// Mean negative quasi-log-likelihood on the standardized series and its
// gradient in theta coordinates.
class Objective {
 public:
  Objective(std::span<const double> x, double h_start) : x_(x), h_start_(h_start) {}

  double operator()(const Vec& th, Vec* grad) const {
    const Natural p = to_natural(th);
    const std::size_t T = x_.size();
    const double n = static_cast<double>(T - 1);
    // Natural-coordinate gradient of sum over t of (ln h + eps^2 / h): (mu, beta, g0, g1, g2).
    std::array<double, 5> g{};
    std::array<double, 5> dh{};  // d h_t / d natural, h_2 is a data constant
    std::array<double, 5> de_prev{};
    double h = h_start_;
    double e_prev = 0.0;
    double total = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
      if (t > 1) {
        std::array<double, 5> next{};
        for (std::size_t k = 0; k < 5; ++k)
          next[k] = p.gamma1 * dh[k] + 2.0 * p.gamma2 * e_prev * de_prev[k];
        next[2] += 1.0;
        next[3] += h;
        next[4] += e_prev * e_prev;
        h = p.gamma0 + p.gamma1 * h + p.gamma2 * e_prev * e_prev;
        dh = next;
      }
      const double e = (x_[t] - p.mu) - p.beta * (x_[t - 1] - p.mu);
      if (!(h > 0.0) || !std::isfinite(h)) return std::numeric_limits<double>::infinity();
      total += kLog2Pi + std::log(h) + e * e / h;
      const std::array<double, 5> de{-(1.0 - p.beta), -(x_[t - 1] - p.mu), 0.0, 0.0, 0.0};
      const double a = 1.0 / h - e * e / (h * h);
      for (std::size_t k = 0; k < 5; ++k) g[k] += a * dh[k] + 2.0 * e / h * de[k];
      e_prev = e;
      de_prev = de;
    }
    if (grad) {
      const double s = p.gamma1 + p.gamma2;
      const double w = p.gamma1 / s;
      const double ds = s * (1.0 - s), dw = w * (1.0 - w);
      Vec& out = *grad;
      out[0] = g[0];
      out[1] = g[1] * (1.0 - p.beta * p.beta);
      out[2] = g[2] * p.gamma0;
      out[3] = (g[3] * w + g[4] * (1.0 - w)) * ds;
      out[4] = (g[3] * s - g[4] * s) * dw;
      for (double& v : out) v *= 0.5 / n;
    }
    return 0.5 * total / n;
  }

 private:
  std::span<const double> x_;
  double h_start_;
};

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct BfgsResult {
  Vec theta;
  double value;
  double grad_norm;
  int iterations;
  bool converged;
};

BfgsResult bfgs(const Objective& f, Vec x) {
  Vec g;
  double fx = f(x, &g);
  std::array<std::array<double, 5>, 5> H{};
  for (std::size_t i = 0; i < 5; ++i) H[i][i] = 1.0;
  int it = 0;
  for (; it < kMaxIterations && norm(g) >= kGradTol; ++it) {
    Vec d{};
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) d[i] -= H[i][j] * g[j];
    double slope = 0.0;
    for (std::size_t i = 0; i < 5; ++i) slope += d[i] * g[i];
    if (slope >= 0.0) {  // not a descent direction: restart from steepest descent
      for (std::size_t i = 0; i < 5; ++i) {
        H[i].fill(0.0);
        H[i][i] = 1.0;
        d[i] = -g[i];
      }
      slope = -norm(g) * norm(g);
    }
    double step = 1.0;
    Vec xn, gn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < 5; ++i) xn[i] = x[i] + step * d[i];
      fn = f(xn, &gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    Vec s, y;
    double sy = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-12 * norm(s) * norm(y)) {
      Vec Hy{};
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) Hy[i] += H[i][j] * y[j];
      double yHy = 0.0;
      for (std::size_t i = 0; i < 5; ++i) yHy += y[i] * Hy[i];
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
          H[i][j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) + (rho * rho * yHy + rho) * s[i] * s[j];
    }
    x = xn;
    g = gn;
    fx = fn;
  }
  const double gn = norm(g);
  return {x, fx, gn, it, gn < kGradTol};
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

MarginalMode parse_marginal_mode(std::string_view text) {
  if (text == "ar1-garch11") return MarginalMode::Ar1Garch11;
  if (text == "none") return MarginalMode::None;
  throw Error(ErrorCode::ParseError, "unknown marginal mode '" + std::string(text) + "'");
}

std::string_view to_string(MarginalMode mode) {
  return mode == MarginalMode::Ar1Garch11 ? "ar1-garch11" : "none";
}

std::vector<double> ar1_garch11_sigma_path(std::span<const double> y, const MarginalFit& p) {
  std::vector<double> path;
  path.reserve(y.size() - 1);
  double h = p.sigma2_start;
  for (std::size_t t = 1; t < y.size(); ++t) {
    if (t > 1) {
      const double e = y[t - 1] - p.alpha - p.beta * y[t - 2];
      h = p.gamma0 + p.gamma1 * h + p.gamma2 * e * e;
    }
    path.push_back(std::sqrt(h));
  }
  return path;
}

double ar1_garch11_loglik(std::span<const double> y, const MarginalFit& p) {
  const auto sigma = ar1_garch11_sigma_path(y, p);
  double ll = 0.0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double e = y[t] - p.alpha - p.beta * y[t - 1];
    const double h = sigma[t - 1] * sigma[t - 1];
    ll += kLog2Pi + std::log(h) + e * e / h;
  }
  return -0.5 * ll;
}

std::vector<double> ar1_garch11_residuals(std::span<const double> y, const MarginalFit& fit) {
  const auto& sigma = fit.sigma_path.size() + 1 == y.size() ? fit.sigma_path : ar1_garch11_sigma_path(y, fit);
  std::vector<double> eta(y.size() - 1);
  for (std::size_t t = 1; t < y.size(); ++t)
    eta[t - 1] = (y[t] - fit.alpha - fit.beta * y[t - 1]) / sigma[t - 1];
  return eta;
}

std::vector<double> simulate_ar1_garch11(const MarginalFit& p, std::span<const double> eta, double y1) {
  std::vector<double> y{y1};
  double h = p.sigma2_start;
  double e_prev = 0.0;
  for (std::size_t t = 0; t < eta.size(); ++t) {
    if (t > 0) h = p.gamma0 + p.gamma1 * h + p.gamma2 * e_prev * e_prev;
    e_prev = std::sqrt(h) * eta[t];
    y.push_back(p.alpha + p.beta * y.back() + e_prev);
  }
  return y;
}

MarginalFit fit_ar1_garch11(std::span<const double> y) {
  if (y.size() < kMinLength)
    throw Error(ErrorCode::SeriesTooShort, "AR(1)-GARCH(1,1) needs T >= 50, got " + std::to_string(y.size()));
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "series contains non-finite values");
  const std::size_t T = y.size();
  const double m = mean_of(y);
  double var = 0.0;
  for (double v : y) var += (v - m) * (v - m);
  var /= static_cast<double>(T);
  if (!(var > 0.0) || std::sqrt(var) <= 1e-14 * std::max(1.0, std::abs(m)))
    throw Error(ErrorCode::DegenerateSeries, "series is constant");
  const double sd = std::sqrt(var);

  std::vector<double> x(T);
  for (std::size_t t = 0; t < T; ++t) x[t] = (y[t] - m) / sd;

  // OLS of x_t on (1, x_{t-1}) for the start variance; lag-1 autocorrelation for beta_0.
  const std::span<const double> lead(x.data() + 1, T - 1), lag(x.data(), T - 1);
  const double ml = mean_of(lead), mg = mean_of(lag);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    sxy += (lag[t] - mg) * (lead[t] - ml);
    sxx += (lag[t] - mg) * (lag[t] - mg);
  }
  const double b_ols = sxy / sxx;
  const double a_ols = ml - b_ols * mg;
  double h_start = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const double r = lead[t] - a_ols - b_ols * lag[t];
    h_start += r * r;
  }
  h_start /= static_cast<double>(T - 1);
  if (!(h_start > 0.0)) throw Error(ErrorCode::DegenerateSeries, "AR(1) fits the series exactly");

  double acf = 0.0;
  for (std::size_t t = 1; t < T; ++t) acf += x[t] * x[t - 1];
  acf /= static_cast<double>(T);  // x has unit sample variance
  const double beta0 = std::clamp(acf, -0.95, 0.95);

  const Vec start{0.0, std::atanh(beta0), std::log(0.1), logit(0.95), logit(0.85 / 0.95)};
  const Objective objective(x, h_start);
  const BfgsResult res = bfgs(objective, start);

  auto to_original = [&](const Vec& th) {
    const Natural p = to_natural(th);
    MarginalFit fit;
    fit.alpha = (m + sd * p.mu) * (1.0 - p.beta);
    fit.beta = p.beta;
    fit.gamma0 = p.gamma0 * var;
    fit.gamma1 = p.gamma1;
    fit.gamma2 = p.gamma2;
    fit.sigma2_start = h_start * var;
    return fit;
  };
  MarginalFit fit = to_original(res.theta);
  fit.initial_loglik = ar1_garch11_loglik(y, to_original(start));
  fit.sigma_path = ar1_garch11_sigma_path(y, fit);
  fit.loglik = ar1_garch11_loglik(y, fit);
  fit.gradient_norm = res.grad_norm;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

ResidualPanel filter_panel(const ReturnPanel& panel, MarginalMode mode) {
  ResidualPanel out;
  out.names = panel.names;
  if (mode == MarginalMode::None) {
    out.dates = panel.dates;
    out.values = panel.values;
    return out;
  }
  const std::size_t T = panel.T(), N = panel.N();
  if (T < kMinLength)
    throw Error(ErrorCode::SeriesTooShort, "AR(1)-GARCH(1,1) filtering needs T >= 50, got " + std::to_string(T));
  out.values = Matrix(T - 1, N);
  out.fits.resize(N);
  if (!panel.dates.empty()) out.dates.assign(panel.dates.begin() + 1, panel.dates.end());

  std::vector<std::exception_ptr> failures(N);
  const auto n = static_cast<std::int64_t>(N);
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
  for (std::int64_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(i);
    try {
      const auto col = panel.values.col(c);
      out.fits[c] = fit_ar1_garch11(col);
      const auto eta = ar1_garch11_residuals(col, out.fits[c]);
      std::copy(eta.begin(), eta.end(), out.values.col(c).begin());
    } catch (...) {
      failures[c] = std::current_exception();
    }
  }
  for (std::size_t c = 0; c < N; ++c) {
    if (!failures[c]) continue;
    const std::string name = c < panel.names.size() ? panel.names[c] : std::to_string(c + 1);
    try {
      std::rethrow_exception(failures[c]);
    } catch (const Error& e) {
      throw Error(e.code(), "column '" + name + "': " + e.detail());
    }
  }
  return out;
}

}  // namespace depbreak
