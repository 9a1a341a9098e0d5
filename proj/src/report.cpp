#include "depbreak/report.hpp"

#include <algorithm>

#include "depbreak/error.hpp"
#include "depbreak/panel_io.hpp"

namespace depbreak {
namespace {

Json optional_date(const std::optional<Date>& d) { return d ? Json(format_date(*d)) : Json(nullptr); }

Json config_json(const BootstrapConfig& c) {
  return {{"B", c.B},
          {"alpha", c.alpha},
          {"seed", c.seed},
          {"epsilon", c.epsilon},
          {"stride", c.stride},
          {"ties", c.ties == TiePolicy::Fail ? "fail" : "jitter"}};
}

Json marginal_json(const std::vector<MarginalFit>& fits, const std::vector<std::string>& names) {
  Json m = {{"series", names}};
  for (const char* key : {"alpha", "beta", "gamma0", "gamma1", "gamma2", "loglik", "converged", "iterations"})
    m[key] = Json::array();
  for (const auto& f : fits) {
    m["alpha"].push_back(f.alpha);
    m["beta"].push_back(f.beta);
    m["gamma0"].push_back(f.gamma0);
    m["gamma1"].push_back(f.gamma1);
    m["gamma2"].push_back(f.gamma2);
    m["loglik"].push_back(f.loglik);
    m["converged"].push_back(f.converged);
    m["iterations"].push_back(f.iterations);
  }
  return m;
}

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  }
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

void flatten(const Json& v, const std::string& prefix, std::string& out) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) flatten(child, prefix.empty() ? k : prefix + "." + k, out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
  } else {
    out += csv_cell(Json(prefix)) + "," + csv_cell(v) + "\n";
  }
}

std::string render(const Json& doc, const Json& config) {
  Json full = doc;
  if (!config.is_null()) full["config"] = config;
  return full.dump(2) + "\n";
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json" || text == "structured-text") return ReportFormat::Json;
  if (text == "csv" || text == "delimiter-separated") return ReportFormat::Csv;
  throw Error(ErrorCode::ParseError, "unknown report format '" + std::string(text) + "'");
}

Json to_json(const TestResult& r) {
  return {{"statistic", r.cusum.statistic},
          {"critical_value", r.critical_value},
          {"p_value", r.p_value},
          {"reject", r.reject},
          {"s_hat", r.cusum.s_hat},
          {"k_hat", r.cusum.k_hat},
          {"T", r.cusum.grid.empty() ? 0 : r.cusum.grid.back()},
          {"measures", r.spec.to_string()},
          {"epsilon", r.config.epsilon},
          {"alpha", r.config.alpha},
          {"B", r.config.B},
          {"seed", r.config.seed},
          {"stride", r.config.stride},
          {"replicates", r.replicates}};
}

Json to_json(const BreakCI& ci) {
  return {{"s_hat", ci.s_hat},
          {"k_hat", ci.k_hat},
          {"lower", ci.lower},
          {"upper", ci.upper},
          {"raw_lower", ci.raw_lower},
          {"raw_upper", ci.raw_upper},
          {"c_low", ci.c_low},
          {"c_high", ci.c_high},
          {"alpha", ci.alpha},
          {"replicates", ci.replicates}};
}

Json to_json(const FullSampleResult& r) {
  Json doc = to_json(r.test);
  doc["break_date"] = r.test.reject ? optional_date(r.break_date) : Json(nullptr);
  doc["marginal_mode"] = std::string(to_string(r.mode));
  doc["series"] = r.names;
  if (!r.fits.empty()) doc["marginal"] = marginal_json(r.fits, r.names);
  if (r.ci) {
    Json ci = to_json(*r.ci);
    ci["lower_date"] = optional_date(r.ci_lower_date);
    ci["upper_date"] = optional_date(r.ci_upper_date);
    doc["ci"] = ci;
  } else {
    doc["ci"] = nullptr;
  }
  return doc;
}

Json to_json(const CommonBreakResult& r) {
  return {{"a", to_json(r.a)},
          {"b", to_json(r.b)},
          {"alpha_star", r.alpha_star},
          {"alpha_per_interval", r.alpha_per_interval},
          {"same_break", r.same_break}};
}

Json to_json(const RollingScanResult& r, const std::vector<std::string>& names) {
  Json breaks = Json::array();
  for (const auto& b : r.breaks)
    breaks.push_back({{"k_hat", b.k_hat},
                      {"break_date", optional_date(b.date)},
                      {"s_hat", b.s_hat},
                      {"statistic", b.statistic},
                      {"critical_value", b.critical_value},
                      {"p_value", b.p_value},
                      {"window_start", b.window_start}});
  Json doc = {{"breaks", breaks},
              {"windows_tested", r.windows_tested},
              {"window", r.window},
              {"scan_stride", r.stride},
              {"measures", r.spec.to_string()},
              {"marginal_mode", std::string(to_string(r.mode))},
              {"mean_break_index", r.mean_break_index()},
              {"multiple_testing", "no correction applied; each window is tested at level alpha"}};
  doc.update(config_json(r.config));
  if (!names.empty()) doc["series"] = names;
  return doc;
}

Json to_json(const McTable& t) {
  Json rows = Json::array();
  for (std::size_t s = 0; s < t.specs.size(); ++s)
    for (std::size_t c = 0; c < t.theta_post.size(); ++c)
      rows.push_back({{"measures", t.specs[s].to_string()},
                      {"theta1", t.theta_post[c]},
                      {"rate", t.rate(s, c)},
                      {"se", t.standard_error(s, c)},
                      {"rejections", t.rejections[s][c]}});
  Json doc = {{"dgp", t.base.to_string()}, {"reps", t.reps}, {"rows", rows}};
  doc.update(config_json(t.config));
  return doc;
}

Json to_json(const SingleBreakCoverage& c) {
  Json doc = {{"design", "single"},
              {"dgp", c.dgp.to_string()},
              {"measures_a", c.spec_a.to_string()},
              {"measures_b", c.spec_b.to_string()},
              {"reps", c.reps},
              {"coverage_a", c.p_a()},
              {"coverage_b", c.p_b()},
              {"coverage_intersection", c.p_both()},
              {"degenerate", c.degenerate}};
  doc.update(config_json(c.config));
  return doc;
}

Json to_json(const TwoBreakCoverage& c) {
  Json doc = {{"design", "two-break"},
              {"dgp_a", c.dgp_a.to_string()},
              {"dgp_b", c.dgp_b.to_string()},
              {"measures_a", c.spec_a.to_string()},
              {"measures_b", c.spec_b.to_string()},
              {"reps", c.reps},
              {"coverage_a", c.p_a()},
              {"coverage_b", c.p_b()},
              {"joint_intersection", c.p_joint()},
              {"degenerate", c.degenerate}};
  doc.update(config_json(c.config));
  return doc;
}

Json to_json(const DependencePath& p) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < p.grid.size(); ++r) {
    Json row = {{"t", p.grid[r]}};
    for (std::size_t j = 0; j < p.spec.size(); ++j) row[p.spec[j].label()] = p.values(r, j);
    rows.push_back(row);
  }
  return {{"T", p.T}, {"measures", p.spec.to_string()}, {"path", rows}};
}

bool is_marker(const RollingSeries& s, std::size_t i) {
  return i < s.dates.size() && std::find(s.markers.begin(), s.markers.end(), s.dates[i]) != s.markers.end();
}

Json to_json(const RollingSeries& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.values.size(); ++i)
    rows.push_back({{"end_index", s.end_index[i]},
                    {"date", i < s.dates.size() ? Json(format_date(s.dates[i])) : Json(nullptr)},
                    {"rho", s.values[i]},
                    {"marker", is_marker(s, i)}});
  Json markers = Json::array();
  for (const auto& d : s.markers) markers.push_back(format_date(d));
  return {{"window", s.window}, {"markers", markers}, {"series", rows}};
}

std::string flatten_to_csv(const Json& doc) {
  std::string out = "key,value\n";
  flatten(doc, "", out);
  return out;
}

std::string to_csv(const McTable& t) {
  std::string out = "measures,theta1,rate,se,rejections,reps\n";
  for (std::size_t s = 0; s < t.specs.size(); ++s)
    for (std::size_t c = 0; c < t.theta_post.size(); ++c)
      out += csv_cell(Json(t.specs[s].to_string())) + "," + format_number(t.theta_post[c]) + "," +
             format_number(t.rate(s, c)) + "," + format_number(t.standard_error(s, c)) + "," +
             std::to_string(t.rejections[s][c]) + "," + std::to_string(t.reps) + "\n";
  return out;
}

std::string to_csv(const RollingScanResult& r) {
  std::string out = "k_hat,break_date,s_hat,statistic,critical_value,p_value,window_start\n";
  for (const auto& b : r.breaks)
    out += std::to_string(b.k_hat) + "," + (b.date ? format_date(*b.date) : "") + "," + format_number(b.s_hat) +
           "," + format_number(b.statistic) + "," + format_number(b.critical_value) + "," +
           format_number(b.p_value) + "," + std::to_string(b.window_start) + "\n";
  return out;
}

std::string to_csv(const DependencePath& p) {
  std::string out = "t";
  for (const auto& m : p.spec.items()) out += "," + m.label();
  out += "\n";
  for (std::size_t r = 0; r < p.grid.size(); ++r) {
    out += std::to_string(p.grid[r]);
    for (std::size_t j = 0; j < p.spec.size(); ++j) out += "," + format_number(p.values(r, j));
    out += "\n";
  }
  return out;
}

std::string to_csv(const RollingSeries& s) {
  std::string out = "end_index,date,rho,marker\n";
  for (std::size_t i = 0; i < s.values.size(); ++i)
    out += std::to_string(s.end_index[i]) + "," + (i < s.dates.size() ? format_date(s.dates[i]) : "") + "," +
           format_number(s.values[i]) + "," + (is_marker(s, i) ? "1" : "0") + "\n";
  return out;
}

void write_report(const Json& doc, const std::filesystem::path& path, ReportFormat format, const Json& config) {
  if (format == ReportFormat::Json) {
    write_text_atomic(path, render(doc, config));
    return;
  }
  Json full = doc;
  if (!config.is_null()) full["config"] = config;
  write_text_atomic(path, flatten_to_csv(full));
}

template <class Record>
void write_table_report(const Record& record, const std::filesystem::path& path, ReportFormat format,
                        const Json& config) {
  if (format == ReportFormat::Json)
    write_text_atomic(path, render(to_json(record), config));
  else
    write_text_atomic(path, to_csv(record));
}

template void write_table_report(const McTable&, const std::filesystem::path&, ReportFormat, const Json&);
template void write_table_report(const RollingScanResult&, const std::filesystem::path&, ReportFormat, const Json&);
template void write_table_report(const DependencePath&, const std::filesystem::path&, ReportFormat, const Json&);
template void write_table_report(const RollingSeries&, const std::filesystem::path&, ReportFormat, const Json&);

}  // namespace depbreak
