#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "depbreak/cusum.hpp"
#include "depbreak/depmeasures.hpp"
#include "depbreak/error.hpp"
#include "depbreak/parallel.hpp"
#include "depbreak/path_kernel.hpp"
#include "depbreak/reference.hpp"
#include "oracles.hpp"

using namespace depbreak;

namespace {

std::vector<double> iota_values(std::size_t n, double start = 1.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
  return v;
}

Matrix identical_columns(std::size_t T, std::size_t N) {
  Matrix m(T, N);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t r = 0; r < T; ++r) m(r, c) = static_cast<double>((r * 37) % T);
  return m;
}

}  // namespace

TEST_CASE("sequential ecdf counts values at or below x") {
  const std::vector<double> v{3, 1, 2};
  CHECK(seq_ecdf(v, 3, 2.0) == Catch::Approx(2.0 / 3.0));
  CHECK(seq_ecdf(v, 1, 2.0) == 0.0);
  CHECK(seq_ecdf(v, 2, 0.5) == 0.0);
  CHECK(seq_ecdf(v, 3, 3.0) == 1.0);
}

TEST_CASE("copula of comonotone and countermonotone samples") {
  const auto x = iota_values(100);
  auto y = x;
  CHECK(seq_copula(x, y, 100, 0.05, 0.05) == Catch::Approx(0.05));
  std::reverse(y.begin(), y.end());
  CHECK(seq_copula(x, y, 100, 0.05, 0.05) == 0.0);
}

TEST_CASE("quantile dependence on constructed samples") {
  // t = 100, q = 0.05: five lowest ranks in each margin, one shared observation.
  std::vector<double> x = iota_values(100), y(100);
  for (std::size_t k = 0; k < 100; ++k) y[k] = static_cast<double>((k + 4) % 100);
  // x ranks 1..5 sit at k = 0..4; y's five smallest values sit at k = 96..99 and 0.
  CHECK(seq_quantile_dep(x, y, 100, 0.05) == Catch::Approx(0.2));
  CHECK(seq_quantile_dep(x, x, 100, 0.95) == Catch::Approx(1.0));
  CHECK(seq_quantile_dep(x, x, 100, 0.05) == Catch::Approx(1.0));
}

TEST_CASE("pair-averaged rho of identical columns") {
  const auto path = dependence_path(identical_columns(100, 3), MeasureSpec::preset(5), {});
  CHECK(path.values(path.grid.size() - 1, 0) == Catch::Approx(1.0602).margin(1e-12));
  const auto x = iota_values(100);
  std::vector<double> y(x.rbegin(), x.rend());
  CHECK(seq_spearman(x, y, 100) == Catch::Approx(-0.9396).margin(1e-12));
}

TEST_CASE("ties are rejected or jittered") {
  Matrix m = identical_columns(100, 2);
  m(3, 1) = m(4, 1);
  CHECK_THROWS_MATCHES(dependence_path(m, MeasureSpec::preset(5), {}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::TiesDetected; }));
  PathOptions opt;
  opt.ties = TiePolicy::Jitter;
  opt.jitter_seed = 11;
  const Matrix j = resolve_ties(m, TiePolicy::Jitter, 11);
  CHECK(j(3, 1) != j(4, 1));
  CHECK(std::abs(j(3, 1) - m(3, 1)) < 1e-8);
  CHECK(j(0, 0) == m(0, 0));  // untied entries untouched
  CHECK(resolve_ties(m, TiePolicy::Jitter, 11) == j);
  CHECK_NOTHROW(dependence_path(m, MeasureSpec::preset(5), opt));
}

TEST_CASE("trim window must hold enough tail observations") {
  CHECK_THROWS_AS(check_trim(MeasureSpec::preset(1), 0.1, 150), Error);  // ceil(15) < 1/0.05
  CHECK_NOTHROW(check_trim(MeasureSpec::preset(1), 0.1, 200));
  CHECK_THROWS_AS(check_trim(MeasureSpec::preset(5), 0.1, 90), Error);  // 9 < 10
  CHECK_NOTHROW(check_trim(MeasureSpec::preset(5), 0.1, 100));
  CHECK(make_grid(10, 0.2, 1) == std::vector<std::size_t>{2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(make_grid(10, 0.2, 3) == std::vector<std::size_t>{2, 5, 8, 10});
}

TEST_CASE("single-pair estimators equal the brute-force oracle on 100 random panels") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  const std::vector<double> levels{0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t T = len(rng);
    const Matrix m = oracle::random_panel(T, 2, rng);
    const auto x = m.col(0), y = m.col(1);
    for (std::size_t t = 1; t <= T; ++t) {
      REQUIRE(seq_ecdf(x, t, y[t - 1]) == oracle::ecdf(x, t, y[t - 1]));
      REQUIRE(seq_spearman(x, y, t) == Catch::Approx(oracle::spearman(x, y, t)).margin(1e-13));
      for (double q : levels) {
        REQUIRE(seq_copula(x, y, t, q, 1.0 - q) == oracle::copula(x, y, t, q, 1.0 - q));
        REQUIRE(seq_quantile_dep(x, y, t, q) == oracle::quantile_dep(x, y, t, q));
      }
    }
  }
}

TEST_CASE("incremental kernel matches the pairwise oracle, including tied resamples") {
  std::mt19937_64 rng(99);
  const MeasureSpec spec({Measure::rho(), Measure::quantile(0.1), Measure::quantile(0.3), Measure::quantile(0.5),
                          Measure::quantile(0.7), Measure::quantile(0.9)});
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t T = 20 + rep, N = 2 + rep % 5;
    const Matrix m = oracle::random_panel(T, N, rng);
    // Resample rows so that duplicates (ties) appear, as in the bootstrap.
    std::uniform_int_distribution<std::size_t> pick(0, T - 1);
    std::vector<std::size_t> rows(T);
    for (auto& r : rows) r = pick(rng);
    for (const Matrix& panel : {m, m.gather_rows(rows)}) {
      const auto grid = make_grid(T, 0.1, 1);
      std::vector<double> got(grid.size() * spec.size());
      PathKernel kernel(spec, N);
      kernel.evaluate(rank_panel(panel), grid, got);
      const auto want = oracle::path(panel, spec, grid);
      for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t j = 0; j < spec.size(); ++j)
          REQUIRE(got[g * spec.size() + j] == Catch::Approx(want[g][j]).margin(1e-12));
    }
  }
}

TEST_CASE("reference implementation agrees with the kernel") {
  std::mt19937_64 rng(5);
  const Matrix m = oracle::random_panel(200, 6, rng);
  const auto fast = dependence_path(m, MeasureSpec::preset(1), {});
  const auto slow = reference::dependence_path(m, MeasureSpec::preset(1), 0.1);
  REQUIRE(fast.grid == slow.grid);
  for (std::size_t g = 0; g < fast.grid.size(); ++g)
    for (std::size_t j = 0; j < 5; ++j) REQUIRE(fast.values(g, j) == Catch::Approx(slow.values(g, j)).margin(1e-12));
}

TEST_CASE("path and statistic are invariant under increasing column transforms") {
  std::mt19937_64 rng(17);
  const Matrix m = oracle::random_panel(300, 4, rng);
  Matrix t = m;
  for (std::size_t r = 0; r < 300; ++r) {
    t(r, 0) = std::exp(m(r, 0));
    t(r, 1) = m(r, 1) * m(r, 1) * m(r, 1) + m(r, 1);
    t(r, 2) = 2.0 * m(r, 2) + 5.0;
    t(r, 3) = std::atan(m(r, 3));
  }
  const auto a = dependence_path(m, MeasureSpec::preset(1), {});
  const auto b = dependence_path(t, MeasureSpec::preset(1), {});
  CHECK(a.values == b.values);
  CHECK(cusum_statistic(a).statistic == cusum_statistic(b).statistic);
}

TEST_CASE("estimator bounds hold along every path") {
  std::mt19937_64 rng(23);
  const MeasureSpec spec({Measure::rho(), Measure::quantile(0.05), Measure::quantile(0.2), Measure::quantile(0.5),
                          Measure::quantile(0.8), Measure::quantile(0.95)});
  for (int rep = 0; rep < 20; ++rep) {
    const double common = rep % 2 == 0 ? 3.0 : -0.4;
    const Matrix m = oracle::random_panel(200 + rep, 3, rng, common);
    const auto path = dependence_path(m, spec, {});
    for (std::size_t g = 0; g < path.grid.size(); ++g) {
      const double t = static_cast<double>(path.grid[g]);
      const double rho = path.values(g, 0);
      REQUIRE(rho >= -1.0 + 6.0 / t + 4.0 / (t * t) - 1e-12);
      REQUIRE(rho <= 1.0 + 6.0 / t + 2.0 / (t * t) + 1e-12);
      for (std::size_t j = 1; j < spec.size(); ++j) {
        const double q = spec[j].level, v = path.values(g, j);
        if (q <= 0.5) {
          REQUIRE(v >= 0.0);
          REQUIRE(v <= std::floor(t * q + 1e-9) / (t * q) + 1e-12);
        } else {
          REQUIRE(v >= -2.0 / (t * (1.0 - q)) - 1e-12);
          REQUIRE(v <= 1.0 + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("extreme samples attain the rho bounds") {
  const auto x = iota_values(40);
  std::vector<double> y(x.rbegin(), x.rend());
  const double t = 40.0;
  CHECK(seq_spearman(x, x, 40) == Catch::Approx(1.0 + 6.0 / t + 2.0 / (t * t)).margin(1e-13));
  CHECK(seq_spearman(x, y, 40) == Catch::Approx(-1.0 + 6.0 / t + 4.0 / (t * t)).margin(1e-13));
}
