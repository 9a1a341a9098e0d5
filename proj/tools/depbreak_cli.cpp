// depbreak command-line interface.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depbreak/bootstrap.hpp"
#include "depbreak/copsim.hpp"
#include "depbreak/error.hpp"
#include "depbreak/marginal_filter.hpp"
#include "depbreak/panel_io.hpp"
#include "depbreak/parallel.hpp"
#include "depbreak/report.hpp"
#include "depbreak/study.hpp"

using namespace depbreak;

namespace {

struct Options {
  std::string command;
  std::string input;
  bool prices = false;
  bool no_header = false;
  bool no_dates = false;
  std::string date_column = "0";
  std::string delimiter;
  std::string measures = "m1";
  std::string measures_b = "m3";
  double epsilon = 0.1;
  double alpha = 0.05;
  std::size_t B = 500;
  std::uint64_t seed = 0;
  std::size_t window = 0;
  std::size_t stride = 1;
  std::size_t grid_stride = 1;
  std::string marginal = "ar1-garch11";
  std::string ties = "fail";
  std::string output;
  std::string format = "json";
  int workers = 0;
  std::string dgp;
  std::size_t reps = 301;
  std::size_t T = 0;
  std::size_t N = 0;
  std::string theta1;
  std::string design = "single";
  std::string breaks = "0.42857142857142855,0.5";
  std::optional<double> s_hat;
  std::string markers;
};

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string tok = text.substr(start, end - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
      throw Error(ErrorCode::ParseError, std::string("bad number '") + tok + "' in " + what);
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

Json resolved_config(const Options& o) {
  Json c = {{"command", o.command},  {"measures", o.measures}, {"epsilon", o.epsilon},
            {"alpha", o.alpha},      {"B", o.B},               {"seed", o.seed},
            {"grid_stride", o.grid_stride}, {"ties", o.ties},  {"format", o.format},
            {"workers", worker_count()}};
  if (!o.input.empty()) {
    c["input"] = o.input;
    c["prices"] = o.prices;
    c["marginal"] = o.marginal;
    c["has_header"] = !o.no_header;
    c["date_column"] = o.no_dates ? Json(nullptr) : Json(o.date_column);
  }
  if (!o.output.empty()) c["output"] = o.output;
  if (o.command == "scan" || o.command == "describe") c["window"] = o.window;
  if (o.command == "scan") c["stride"] = o.stride;
  if (o.command == "common-break" || o.command == "mc-coverage") c["measures_b"] = o.measures_b;
  if (!o.dgp.empty()) c["dgp"] = o.dgp;
  if (o.command.rfind("mc-", 0) == 0) c["reps"] = o.reps;
  if (o.command == "mc-size-power" && !o.theta1.empty()) c["theta1"] = o.theta1;
  if (o.command == "mc-coverage") {
    c["design"] = o.design;
    if (o.design == "two-break") c["breaks"] = o.breaks;
  }
  if (o.T) c["T"] = o.T;
  if (o.N) c["N"] = o.N;
  if (o.s_hat) c["s_hat"] = *o.s_hat;
  if (!o.markers.empty()) c["markers"] = o.markers;
  return c;
}

BootstrapConfig bootstrap_config(const Options& o) {
  BootstrapConfig c;
  c.B = o.B;
  c.alpha = o.alpha;
  c.seed = o.seed;
  c.epsilon = o.epsilon;
  c.stride = o.grid_stride;
  if (o.ties == "fail")
    c.ties = TiePolicy::Fail;
  else if (o.ties == "jitter")
    c.ties = TiePolicy::Jitter;
  else
    throw Error(ErrorCode::ParseError, "unknown tie policy '" + o.ties + "'");
  return c;
}

ReturnPanel load_input(const Options& o) {
  if (o.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
  LoadOptions lo;
  lo.has_header = !o.no_header;
  if (o.no_dates) {
    lo.date_column = NoDateColumn{};
  } else if (!o.date_column.empty() && std::all_of(o.date_column.begin(), o.date_column.end(), ::isdigit)) {
    lo.date_column = static_cast<std::size_t>(std::stoul(o.date_column));
  } else {
    lo.date_column = o.date_column;
  }
  if (!o.delimiter.empty()) lo.delimiter = o.delimiter == "\\t" || o.delimiter == "tab" ? '\t' : o.delimiter[0];
  ReturnPanel panel = load_panel(o.input, lo);
  return o.prices ? to_log_returns(panel) : panel;
}

DgpSpec dgp_of(const Options& o) {
  if (o.dgp.empty()) throw Error(ErrorCode::InvalidArgument, "--dgp is required");
  DgpSpec d = parse_dgp(o.dgp);
  if (o.T) d.T = o.T;
  if (o.N) d.N = o.N;
  d.validate();
  return d;
}

void emit(const Json& doc, const Options& o, const Json& config) {
  const ReportFormat format = parse_report_format(o.format);
  if (o.output.empty()) {
    Json full = doc;
    full["config"] = config;
    std::cout << (format == ReportFormat::Json ? full.dump(2) + "\n" : flatten_to_csv(full));
    return;
  }
  write_report(doc, o.output, format, config);
}

template <class Record>
void emit_table(const Record& record, const Options& o, const Json& config) {
  const ReportFormat format = parse_report_format(o.format);
  if (o.output.empty()) {
    if (format == ReportFormat::Csv) {
      std::cout << to_csv(record);
    } else {
      Json full = to_json(record);
      full["config"] = config;
      std::cout << full.dump(2) << "\n";
    }
    return;
  }
  write_table_report(record, o.output, format, config);
}

void summarize(const FullSampleResult& r, const char* label = "") {
  std::clog << label << "M_T = " << r.test.cusum.statistic << ", critical value = " << r.test.critical_value
            << ", p = " << r.test.p_value << (r.test.reject ? ", reject" : ", no rejection")
            << ", s_hat = " << r.test.cusum.s_hat;
  if (r.break_date) std::clog << " (" << format_date(*r.break_date) << ")";
  std::clog << "\n";
}

// Every flag that has a grammar is checked before any data is read.
void validate_flags(const Options& o) {
  if (o.command == "mc-size-power")
    parse_measure_spec_list(o.measures);
  else
    parse_measure_spec(o.measures);
  if (o.command == "common-break" || o.command == "mc-coverage") parse_measure_spec(o.measures_b);
  parse_marginal_mode(o.marginal);
  parse_report_format(o.format);
  bootstrap_config(o);
  if (o.B < 1) throw Error(ErrorCode::InsufficientReplicates, "--B must be at least 1");
  if (o.grid_stride < 1) throw Error(ErrorCode::InvalidArgument, "--grid-stride must be at least 1");
  if (o.stride < 1) throw Error(ErrorCode::InvalidArgument, "--stride must be at least 1");
  if (!o.dgp.empty()) dgp_of(o);
  if (!o.theta1.empty()) parse_number_list(o.theta1, "--theta1");
  if (o.command == "mc-coverage" && o.design != "single" && o.design != "two-break")
    throw Error(ErrorCode::InvalidArgument, "--design must be single or two-break");
}

int run(const Options& o) {
  const Json config = resolved_config(o);
  std::clog << "config: " << config.dump() << "\n";
  const BootstrapConfig bc = bootstrap_config(o);

  if (o.command == "test") {
    const auto r = full_sample_test(load_input(o), parse_measure_spec(o.measures), parse_marginal_mode(o.marginal), bc);
    summarize(r);
    emit(to_json(r), o, config);
  } else if (o.command == "scan") {
    const ReturnPanel panel = load_input(o);
    const auto r = rolling_scan(panel, parse_measure_spec(o.measures), o.window ? o.window : 400,
                                parse_marginal_mode(o.marginal), bc, o.stride);
    std::clog << r.breaks.size() << " break(s) in " << r.windows_tested << " windows\n";
    const ReportFormat format = parse_report_format(o.format);
    if (format == ReportFormat::Csv) {
      emit_table(r, o, config);
    } else {
      emit(to_json(r, panel.names), o, config);
    }
  } else if (o.command == "ci") {
    const ResidualPanel res = filter_panel(load_input(o), parse_marginal_mode(o.marginal));
    const MeasureSpec spec = parse_measure_spec(o.measures);
    double s = 0.0;
    if (o.s_hat) {
      s = *o.s_hat;
    } else {
      PathOptions po{bc.epsilon, bc.stride, bc.ties, bc.seed};
      s = cusum_statistic(dependence_path(res.values, spec, po)).s_hat;
    }
    BootstrapConfig cc = bc;
    cc.seed = ci_seed(bc.seed);
    const BreakCI ci = break_ci_bootstrap(res.values, spec, s, cc);
    std::clog << "s_hat = " << ci.s_hat << ", interval [" << ci.lower << ", " << ci.upper << "]\n";
    Json doc = to_json(ci);
    doc["measures"] = spec.to_string();
    emit(doc, o, config);
  } else if (o.command == "common-break") {
    const ResidualPanel res = filter_panel(load_input(o), parse_marginal_mode(o.marginal));
    CommonBreakResult cb;
    cb.alpha_star = o.alpha;
    cb.alpha_per_interval = common_break_alpha(o.alpha);
    auto one = [&](const MeasureSpec& spec) {
      FullSampleResult r;
      r.mode = parse_marginal_mode(o.marginal);
      r.fits = res.fits;
      r.names = res.names;
      r.test = run_test(res, spec, bc);
      BootstrapConfig cc = bc;
      cc.alpha = cb.alpha_per_interval;
      cc.seed = ci_seed(bc.seed);
      r.ci = break_ci_bootstrap(res.values, spec, r.test.cusum.s_hat, cc);
      if (r.test.cusum.k_hat >= 1 && r.test.cusum.k_hat <= res.dates.size())
        r.break_date = res.dates[r.test.cusum.k_hat - 1];
      return r;
    };
    cb.a = one(parse_measure_spec(o.measures));
    cb.b = one(parse_measure_spec(o.measures_b));
    cb.same_break = same_break(cb.a.test.cusum.s_hat, *cb.a.ci, cb.b.test.cusum.s_hat, *cb.b.ci);
    summarize(cb.a, "a: ");
    summarize(cb.b, "b: ");
    std::clog << (cb.same_break ? "same break\n" : "different breaks\n");
    emit(to_json(cb), o, config);
  } else if (o.command == "simulate") {
    const DgpSpec d = dgp_of(o);
    Rng rng = make_stream(o.seed, {0});
    const ResidualPanel sim = simulate_panel(d, rng);
    ReturnPanel out{{}, sim.names, sim.values};
    if (o.output.empty())
      std::cout << panel_to_csv(out);
    else
      write_panel(out, o.output);
  } else if (o.command == "mc-size-power") {
    const DgpSpec d = dgp_of(o);
    const std::vector<double> thetas = o.theta1.empty() ? std::vector<double>{d.theta_post}
                                                        : parse_number_list(o.theta1, "--theta1");
    DgpSpec base = d;
    if (!base.break_fraction) base.break_fraction = 0.5;
    const auto table = mc_rejection_table(base, thetas, parse_measure_spec_list(o.measures), o.reps, bc);
    for (std::size_t s = 0; s < table.specs.size(); ++s)
      for (std::size_t c = 0; c < thetas.size(); ++c)
        std::clog << table.specs[s].to_string() << " theta1=" << thetas[c] << ": " << table.rate(s, c) << " (se "
                  << table.standard_error(s, c) << ")\n";
    emit_table(table, o, config);
  } else if (o.command == "mc-coverage") {
    const DgpSpec d = dgp_of(o);
    const MeasureSpec a = parse_measure_spec(o.measures), b = parse_measure_spec(o.measures_b);
    if (o.design == "single") {
      DgpSpec dd = d;
      if (!dd.break_fraction) dd.break_fraction = 0.5;
      const auto cov = mc_coverage_single(dd, a, b, o.reps, bc);
      std::clog << "coverage " << cov.p_a() << " / " << cov.p_b() << " / " << cov.p_both() << "\n";
      emit(to_json(cov), o, config);
    } else if (o.design == "two-break") {
      const auto br = parse_number_list(o.breaks, "--breaks");
      if (br.size() != 2) throw Error(ErrorCode::InvalidArgument, "--breaks needs two fractions");
      DgpSpec da = d, db = d;
      da.break_fraction = br[0];
      db.break_fraction = br[1];
      const auto cov = mc_coverage_two_break(da, db, a, b, o.reps, bc);
      std::clog << "coverage " << cov.p_a() << " / " << cov.p_b() << ", joint " << cov.p_joint() << "\n";
      emit(to_json(cov), o, config);
    } else {
      throw Error(ErrorCode::InvalidArgument, "--design must be single or two-break");
    }
  } else if (o.command == "describe") {
    const ResidualPanel res = filter_panel(load_input(o), parse_marginal_mode(o.marginal));
    RollingSeries series = rolling_spearman(res, o.window ? o.window : 150, bc.ties, bc.seed);
    if (!o.markers.empty()) {
      std::size_t start = 0;
      while (start <= o.markers.size()) {
        auto end = o.markers.find(',', start);
        if (end == std::string::npos) end = o.markers.size();
        const auto tok = o.markers.substr(start, end - start);
        auto d = parse_date(tok);
        if (!d) throw Error(ErrorCode::ParseError, "bad marker date '" + tok + "'");
        series.markers.push_back(*d);
        start = end + 1;
      }
    }
    emit_table(series, o, config);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Break detection in the dependence of multivariate time series"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--measures", o.measures, "Measure spec: preset m1..m5 or list like rho,q0.05");
    sub->add_option("--epsilon", o.epsilon, "Trimming fraction")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--B", o.B, "Bootstrap replicates");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--grid-stride", o.grid_stride, "Step between CUSUM grid points");
    sub->add_option("--ties", o.ties, "Tie policy: fail or jitter");
    sub->add_option("--output", o.output, "Output file (stdout when omitted)");
    sub->add_option("--format", o.format, "json or csv");
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  };
  auto input = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Delimited panel file")->required();
    sub->add_flag("--prices", o.prices, "Input holds prices; convert to log-returns");
    sub->add_flag("--no-header", o.no_header, "Input has no header row");
    sub->add_flag("--no-dates", o.no_dates, "Input has no date column");
    sub->add_option("--date-column", o.date_column, "Date column name or 0-based index");
    sub->add_option("--delimiter", o.delimiter, "Field delimiter (auto-detected by default)");
    sub->add_option("--marginal", o.marginal, "ar1-garch11 or none");
  };
  auto mc = [&](CLI::App* sub) {
    sub->add_option("--dgp", o.dgp, "Data-generating process, e.g. factor:lambda=-0.5,theta0=1,theta1=1.5,s0=0.5")
        ->required();
    sub->add_option("--reps", o.reps, "Monte Carlo repetitions");
    sub->add_option("--T", o.T, "Override sample size");
    sub->add_option("--N", o.N, "Override number of series");
  };

  auto* test = app.add_subcommand("test", "Full-sample break test with a CI on rejection");
  common(test);
  input(test);
  auto* scan = app.add_subcommand("scan", "Rolling-window break scan");
  common(scan);
  input(scan);
  scan->add_option("--window", o.window, "Window length L (default 400)");
  scan->add_option("--stride", o.stride, "Advance after a non-rejection");
  auto* ci = app.add_subcommand("ci", "Bootstrap confidence interval for the break fraction");
  common(ci);
  input(ci);
  ci->add_option("--s-hat", o.s_hat, "Break fraction (estimated when omitted)");
  auto* cb = app.add_subcommand("common-break", "Check whether two specs locate the same break");
  common(cb);
  input(cb);
  cb->add_option("--measures-b", o.measures_b, "Second measure spec");
  auto* sim = app.add_subcommand("simulate", "Simulate a residual panel");
  sim->add_option("--dgp", o.dgp, "Data-generating process")->required();
  sim->add_option("--T", o.T, "Override sample size");
  sim->add_option("--N", o.N, "Override number of series");
  sim->add_option("--seed", o.seed, "Seed");
  sim->add_option("--output", o.output, "Output CSV (stdout when omitted)");
  auto* mcsp = app.add_subcommand("mc-size-power", "Monte Carlo rejection rates");
  common(mcsp);
  mc(mcsp);
  mcsp->add_option("--theta1", o.theta1, "Comma-separated post-break parameters");
  auto* mccov = app.add_subcommand("mc-coverage", "Monte Carlo coverage of break intervals");
  common(mccov);
  mc(mccov);
  mccov->add_option("--measures-b", o.measures_b, "Second measure spec");
  mccov->add_option("--design", o.design, "single or two-break");
  mccov->add_option("--breaks", o.breaks, "Two break fractions for the two-break design");
  auto* desc = app.add_subcommand("describe", "Rolling-window average Spearman's rho");
  common(desc);
  input(desc);
  desc->add_option("--window", o.window, "Window length (default 150)");
  desc->add_option("--markers", o.markers, "Comma-separated break dates to flag");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  o.command = app.get_subcommands().front()->get_name();
  try {
    validate_flags(o);
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    set_worker_count(o.workers);
    return run(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
