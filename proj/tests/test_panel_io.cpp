#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "depbreak/error.hpp"
#include "depbreak/panel_io.hpp"

using namespace depbreak;
using namespace std::chrono;

namespace {

bool has_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("depbreak_io_" + name);
}

}  // namespace

TEST_CASE("three-row two-asset file") {
  const auto p = parse_panel("date,a,b\n2020-01-01,1.5,2\n2020-01-02,-0.25,3e-2\n2020-01-03,0,4\n");
  CHECK(p.T() == 3);
  CHECK(p.N() == 2);
  CHECK(p.names == std::vector<std::string>{"a", "b"});
  CHECK(p.values(1, 1) == 0.03);
  CHECK(p.dates[2] == year_month_day{year{2020}, month{1}, day{3}});
}

TEST_CASE("file load through the filesystem") {
  const auto path = temp_file("load.csv");
  {
    std::ofstream f(path);
    f << "date;x;y;z\n01.02.2007;1;2;3\n\n02.02.2007;4;5;6\n";
  }
  const auto p = load_panel(path);
  CHECK(p.T() == 2);
  CHECK(p.N() == 3);
  CHECK(format_date(p.dates[0]) == "2007-02-01");
  std::filesystem::remove(path);
  CHECK(has_code(ErrorCode::IoFailure, [&] { load_panel(path); }));
}

TEST_CASE("missing cells name row and column") {
  try {
    parse_panel("date,a,b\n2020-01-01,1,2\n2020-01-02,NA,3\n");
    FAIL("expected UnparseableCell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnparseableCell);
    const std::string msg = e.what();
    CHECK(msg.find("NA") != std::string::npos);
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("(a)") != std::string::npos);
  }
  CHECK(has_code(ErrorCode::UnparseableCell, [] { parse_panel("date,a,b\n2020-01-01,1\n2020-01-02,2,3\n"); }));
  CHECK(has_code(ErrorCode::UnparseableCell, [] { parse_panel("date,a,b\n2020-01-01,1,\n2020-01-02,2,3\n"); }));
}

TEST_CASE("shape and date checks") {
  CHECK(has_code(ErrorCode::NonMonotoneDates, [] { parse_panel("date,a,b\n2020-01-02,1,2\n2020-01-01,1,3\n"); }));
  CHECK(has_code(ErrorCode::NonMonotoneDates, [] { parse_panel("date,a,b\n2020-01-02,1,2\n2020-01-02,1,3\n"); }));
  CHECK(has_code(ErrorCode::TooFewColumns, [] { parse_panel("date,a\n2020-01-01,1\n2020-01-02,2\n"); }));
  CHECK(has_code(ErrorCode::TooFewRows, [] { parse_panel("date,a,b\n2020-01-01,1,2\n"); }));
  CHECK(has_code(ErrorCode::UnparseableCell, [] { parse_panel("date,a,b\n2020-13-01,1,2\n2020-12-02,1,3\n"); }));
}

TEST_CASE("delimiters, header options and date columns") {
  const auto tab = parse_panel("d\ta\tb\n2020-01-01\t1\t2\n2020-01-02\t3\t4\n");
  CHECK(tab.values(1, 0) == 3);
  LoadOptions undated;
  undated.date_column = NoDateColumn{};
  undated.has_header = false;
  const auto raw = parse_panel("1,2\n3,4\n5,6\n", undated);
  CHECK(raw.dates.empty());
  CHECK(raw.names == std::vector<std::string>{"x1", "x2"});
  LoadOptions named;
  named.date_column = std::string("when");
  const auto mid = parse_panel("a,when,b\n1,2020-01-01,2\n3,2020-01-02,4\n", named);
  CHECK(mid.names == std::vector<std::string>{"a", "b"});
  CHECK(mid.values(1, 1) == 4);
  LoadOptions forced;
  forced.delimiter = ';';
  CHECK(parse_panel("date;a;b\n2020-01-01;1;2\n2020-01-02;3;4\n", forced).N() == 2);
  CHECK(parse_panel("\"date\",\"a\",\"b\"\n2020-01-01, 1 ,2\n2020-01-02,3,4\n").values(0, 0) == 1);
}

TEST_CASE("log returns from prices") {
  ReturnPanel prices;
  prices.names = {"a", "b", "c"};
  prices.values = Matrix(3, 3);
  const double col_a[] = {100, 105, 99.75}, col_b[] = {1, 1, 1}, col_c[] = {1, std::exp(1.0), std::exp(1.0)};
  for (std::size_t r = 0; r < 3; ++r) prices.values(r, 0) = col_a[r], prices.values(r, 1) = col_b[r], prices.values(r, 2) = col_c[r];
  prices.dates = {year_month_day{year{2020}, month{1}, day{1}}, year_month_day{year{2020}, month{1}, day{2}},
                  year_month_day{year{2020}, month{1}, day{3}}};
  const auto r = to_log_returns(prices);
  REQUIRE(r.T() == 2);
  CHECK(r.values(0, 0) == Catch::Approx(std::log(1.05)).epsilon(1e-15));
  CHECK(r.values(1, 0) == Catch::Approx(std::log(0.95)).epsilon(1e-14));
  CHECK(r.values(0, 1) == 0.0);
  CHECK(r.values(1, 1) == 0.0);
  CHECK(r.values(0, 2) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(r.dates.front() == prices.dates[1]);
  prices.values(2, 1) = 0.0;
  CHECK(has_code(ErrorCode::NonPositivePrice, [&] { to_log_returns(prices); }));
}

TEST_CASE("log returns ignore per-column scaling") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(50, 150);
  ReturnPanel p;
  p.names = {"a", "b"};
  p.values = Matrix(40, 2);
  for (std::size_t r = 0; r < 40; ++r) p.values(r, 0) = u(rng), p.values(r, 1) = u(rng);
  ReturnPanel scaled = p;
  for (std::size_t r = 0; r < 40; ++r) scaled.values(r, 0) *= 7.5, scaled.values(r, 1) *= 0.001;
  const auto a = to_log_returns(p), b = to_log_returns(scaled);
  for (std::size_t r = 0; r < a.T(); ++r)
    for (std::size_t c = 0; c < 2; ++c) REQUIRE(a.values(r, c) == Catch::Approx(b.values(r, c)).margin(1e-14));
}

TEST_CASE("write then load round-trips bit-exactly") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  ReturnPanel p;
  p.names = {"alpha", "beta", "gamma"};
  p.values = Matrix(50, 3);
  for (std::size_t r = 0; r < 50; ++r) {
    p.dates.push_back(sys_days{year{2001} / 1 / 1} + days{static_cast<int>(r)});
    for (std::size_t c = 0; c < 3; ++c) p.values(r, c) = z(rng) * std::pow(10.0, static_cast<int>(c) * 4 - 4);
  }
  p.values(0, 0) = 0.1;
  p.values(1, 0) = 1.0 / 3.0;
  p.values(2, 0) = -5e-300;
  const auto path = temp_file("roundtrip.csv");
  write_panel(p, path);
  const auto back = load_panel(path);
  CHECK(back.values == p.values);
  CHECK(back.dates == p.dates);
  CHECK(back.names == p.names);
  std::filesystem::remove(path);
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto path = temp_file("atomic.txt");
  write_text_atomic(path, "hello\n");
  std::ifstream f(path);
  std::string s;
  std::getline(f, s);
  CHECK(s == "hello");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
  CHECK(has_code(ErrorCode::IoFailure, [] { write_text_atomic("/nonexistent-dir/x/y.txt", "z"); }));
}
