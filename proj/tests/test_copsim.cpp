#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "depbreak/copsim.hpp"
#include "depbreak/depmeasures.hpp"
#include "depbreak/error.hpp"

using namespace depbreak;

namespace {

bool has_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

struct Moments {
  double mean = 0, var = 0, skew = 0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m.var = m2;
  m.skew = m3 / std::pow(m2, 1.5);
  return m;
}

// Empirical quantile dependence of two columns over all rows.
double empirical_lambda(const Matrix& m, std::size_t i, std::size_t j, double q) {
  return seq_quantile_dep(m.col(i), m.col(j), m.rows(), q);
}

double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    d = std::max(d, static_cast<double>(k + 1) / n - x[k]);
    d = std::max(d, x[k] - static_cast<double>(k) / n);
  }
  return d;
}

DgpSpec copula_spec(CopulaFamily f, double theta, std::size_t T, std::size_t N) {
  DgpSpec d;
  d.family = f;
  d.theta_pre = d.theta_post = theta;
  d.T = T;
  d.N = N;
  return d;
}

}  // namespace

TEST_CASE("closed-form quantile dependence values") {
  const double clayton = std::pow(2.0 * std::pow(0.05, -2.5) - 1.0, -0.4) / 0.05;
  const double gumbel = (1.0 - 1.9 + std::pow(0.95, std::sqrt(2.0))) / 0.05;
  CHECK(population_quantile_dep(PopulationFamily::Clayton, 2.5, 0.05) == Catch::Approx(clayton).epsilon(1e-14));
  CHECK(population_quantile_dep(PopulationFamily::Gumbel, 2.0, 0.95) == Catch::Approx(gumbel).epsilon(1e-12));
  CHECK(std::round(clayton * 1e4) / 1e4 == 0.7579);
  // 0.600577 to six places.
  CHECK(std::round(gumbel * 1e6) / 1e6 == 0.600577);
  for (double q : {0.05, 0.3, 0.5}) CHECK(population_quantile_dep("comonotone", 0.0, q) == Catch::Approx(1.0));
  CHECK(population_quantile_dep("independence", 0.0, 0.1) == Catch::Approx(0.1));
  CHECK(population_quantile_dep("independence", 0.0, 0.9) == Catch::Approx(0.1));
  CHECK(has_code(ErrorCode::UnsupportedFamily, [] { population_quantile_dep("frank", 1.0, 0.1); }));
}

TEST_CASE("Hansen constants standardize the density") {
  using boost::math::quadrature::gauss_kronrod;
  for (double lambda : {-0.5, 0.0, 0.5}) {
    const HansenSkewT d(4.0, lambda);
    const auto integrate = [&](auto f) {
      return gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(), -d.a() / d.b(), 12) +
             gauss_kronrod<double, 61>::integrate(f, -d.a() / d.b(), std::numeric_limits<double>::infinity(), 12);
    };
    CHECK(integrate([&](double z) { return d.pdf(z); }) == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(integrate([&](double z) { return z * d.pdf(z); }) == Catch::Approx(0.0).margin(1e-8));
    // nu = 4 has a finite but slowly converging second moment.
    CHECK(integrate([&](double z) { return z * z * d.pdf(z); }) == Catch::Approx(1.0).epsilon(1e-4));
    for (double u : {0.001, 0.1, 0.4, 0.5, 0.77, 0.999}) CHECK(d.cdf(d.quantile(u)) == Catch::Approx(u).epsilon(1e-10));
  }
}

TEST_CASE("symmetric skew-t draws have unit variance and no skew") {
  Rng rng = make_stream(1, {0});
  const auto m = moments(sample_hansen_skewt(10.0, 0.0, 1'000'000, rng));
  CHECK(std::abs(m.skew) < 0.05);
  CHECK(std::abs(m.var - 1.0) < 0.01);
}

TEST_CASE("skewed draws at nu = 4 stay standardized") {
  Rng rng = make_stream(2, {0});
  const auto m = moments(sample_hansen_skewt(4.0, -0.5, 1'000'000, rng));
  CHECK(std::abs(m.mean) < 0.005);
  CHECK(std::abs(m.var - 1.0) < 0.02);
}

TEST_CASE("sample skewness follows the sign of lambda") {
  for (double lambda : {-0.5, 0.5}) {
    Rng rng = make_stream(3, {0});
    const auto m = moments(sample_hansen_skewt(8.0, lambda, 200'000, rng));
    CHECK((m.skew > 0) == (lambda > 0));
  }
}

TEST_CASE("factor panel without a common factor has independent columns") {
  DgpSpec d = parse_dgp("factor:theta0=0,T=2000,N=4");
  Rng rng = make_stream(4, {0});
  const auto p = simulate_panel(d, rng);
  REQUIRE(p.T() == 2000);
  REQUIRE(p.N() == 4);
  CHECK(p.names.front() == "x1");
  CHECK(p.dates.empty());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      // Rank correlation from mid-ranks of the full sample.
      const double rho = seq_spearman(p.values.col(i), p.values.col(j), 2000) - 6.0 / 2000;
      CHECK(std::abs(rho) < 0.05);
    }
}

TEST_CASE("factor panel correlation matches the moment identity") {
  DgpSpec d = parse_dgp("factor:nu_inv=0.25,lambda=0,theta0=1,T=5000,N=4");
  Rng rng = make_stream(5, {0});
  const auto p = simulate_panel(d, rng);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const auto x = p.values.col(i), y = p.values.col(j);
      const double n = 5000;
      const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
      const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t k = 0; k < 5000; ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
      }
      CHECK(std::abs(sxy / std::sqrt(sxx * syy) - 1.0 / 3.0) < 0.03);
    }
}

TEST_CASE("factor break switches theta after floor(s0 T)") {
  const DgpSpec d = parse_dgp("factor:theta0=1,theta1=1.5,s0=0.5,T=1001");
  CHECK(d.break_index() == 500);
  CHECK(d.theta_at(500) == 1.0);
  CHECK(d.theta_at(501) == 1.5);
  const DgpSpec none = parse_dgp("factor:theta0=1,theta1=3");
  CHECK_FALSE(none.break_fraction);
  CHECK(none.theta_at(none.T) == 1.0);
}

TEST_CASE("Clayton lower-tail dependence matches the closed form") {
  Rng rng = make_stream(6, {0});
  const auto p = simulate_panel(copula_spec(CopulaFamily::Clayton, 2.5, 1'000'000, 2), rng);
  CHECK(std::abs(empirical_lambda(p.values, 0, 1, 0.05) - 0.7579) < 0.01);
}

TEST_CASE("Clayton near zero behaves like independence") {
  Rng rng = make_stream(7, {0});
  const auto p = simulate_panel(copula_spec(CopulaFamily::Clayton, 0.01, 200'000, 2), rng);
  CHECK(std::abs(empirical_lambda(p.values, 0, 1, 0.05) - 0.05) < 0.01);
}

TEST_CASE("Gumbel upper-tail dependence matches the closed form") {
  Rng rng = make_stream(8, {0});
  const auto p = simulate_panel(copula_spec(CopulaFamily::Gumbel, 2.0, 1'000'000, 2), rng);
  CHECK(std::abs(empirical_lambda(p.values, 0, 1, 0.95) - 0.6007) < 0.01);
}

TEST_CASE("Gumbel at theta = 1 is the independence copula") {
  Rng rng = make_stream(9, {0});
  const auto p = simulate_panel(copula_spec(CopulaFamily::Gumbel, 1.0, 200'000, 2), rng);
  CHECK(std::abs(empirical_lambda(p.values, 0, 1, 0.95) - 0.05) < 0.01);
}

TEST_CASE("copula samples have uniform margins in the open unit interval") {
  for (auto f : {CopulaFamily::Clayton, CopulaFamily::Gumbel}) {
    Rng rng = make_stream(10, {0});
    const std::size_t T = 20'000;
    const auto p = simulate_panel(copula_spec(f, 3.0, T, 5), rng);
    for (std::size_t c = 0; c < 5; ++c) {
      const auto col = p.values.col(c);
      for (double v : col) REQUIRE((v > 0.0 && v < 1.0));
      CHECK(ks_uniform({col.begin(), col.end()}) < 2.0 / std::sqrt(static_cast<double>(T)));
    }
  }
}

TEST_CASE("exchangeable copulas give similar tail dependence across pairs") {
  Rng rng = make_stream(11, {0});
  const auto p = simulate_panel(copula_spec(CopulaFamily::Clayton, 2.5, 100'000, 4), rng);
  std::vector<double> lam;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) lam.push_back(empirical_lambda(p.values, i, j, 0.05));
  const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
  CHECK(*hi - *lo < 0.05);
}

TEST_CASE("identical seed gives a bit-identical panel") {
  for (const char* s : {"factor:lambda=-0.5,theta0=1,theta1=1.5,s0=0.5,T=300,N=5",
                        "clayton:theta0=2.5,theta1=3.5,s0=0.5,T=300,N=5", "gumbel:theta0=2,T=300,N=5"}) {
    const DgpSpec d = parse_dgp(s);
    Rng a = make_stream(12, {0}), b = make_stream(12, {0});
    CHECK(simulate_panel(d, a).values == simulate_panel(d, b).values);
  }
}

TEST_CASE("factor outputs are finite") {
  Rng rng = make_stream(13, {0});
  const auto p = simulate_panel(parse_dgp("factor:lambda=0.5,theta0=2,T=2000,N=6"), rng);
  for (std::size_t r = 0; r < p.T(); ++r)
    for (std::size_t c = 0; c < p.N(); ++c) REQUIRE(std::isfinite(p.values(r, c)));
}

TEST_CASE("DGP strings parse and validate") {
  const DgpSpec d = parse_dgp("clayton:theta0=2.5,theta1=3.5,s0=0.5");
  CHECK(d.family == CopulaFamily::Clayton);
  CHECK(d.theta_pre == 2.5);
  CHECK(d.theta_post == 3.5);
  CHECK(d.break_fraction.value() == 0.5);
  CHECK(d.T == 1000);
  CHECK(d.N == 10);
  CHECK(parse_dgp(d.to_string()).theta_post == 3.5);
  CHECK(has_code(ErrorCode::UnsupportedFamily, [] { parse_dgp("frank:theta0=2"); }));
  CHECK_THROWS_AS(parse_dgp("gumbel:theta0=0.5"), Error);
  CHECK_THROWS_AS(parse_dgp("clayton:theta0=-1"), Error);
  CHECK_THROWS_AS(parse_dgp("factor:nu_inv=0.6"), Error);
  CHECK_THROWS_AS(parse_dgp("factor:lambda=1"), Error);
  CHECK_THROWS_AS(parse_dgp("factor:theta0=1,s0=1.5"), Error);
  CHECK_THROWS_AS(parse_dgp("factor:bogus=1"), Error);
}
