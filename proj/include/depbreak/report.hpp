#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "depbreak/bootstrap.hpp"
#include "depbreak/depmeasures.hpp"
#include "depbreak/study.hpp"

namespace depbreak {

/// Structured text is JSON; delimited is CSV.
enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view text);

/// Result of the common-break check between two break estimates.
struct CommonBreakResult {
  FullSampleResult a;
  FullSampleResult b;
  double alpha_star = 0.05;
  double alpha_per_interval = 0.0;
  bool same_break = false;
};

using Json = nlohmann::json;

/// JSON documents with stable keys. Test records carry statistic,
/// critical_value, p_value, s_hat, k_hat, break_date, measures, epsilon, alpha,
/// B and seed; fitted marginals appear under marginal.alpha, marginal.beta,
/// marginal.gamma0, marginal.gamma1, marginal.gamma2, marginal.converged.
Json to_json(const TestResult& result);
Json to_json(const BreakCI& ci);
Json to_json(const FullSampleResult& result);
Json to_json(const CommonBreakResult& result);
Json to_json(const RollingScanResult& result, const std::vector<std::string>& names = {});
Json to_json(const McTable& table);
Json to_json(const SingleBreakCoverage& cov);
Json to_json(const TwoBreakCoverage& cov);
Json to_json(const DependencePath& path);
Json to_json(const RollingSeries& series);

/// Nested objects become dotted keys and array elements indexed keys
/// ("marginal.alpha.0"); output is a two-column key,value CSV.
std::string flatten_to_csv(const Json& doc);

/// Tabular CSV renderings for record types that are naturally tables.
std::string to_csv(const McTable& table);
std::string to_csv(const RollingScanResult& result);
std::string to_csv(const DependencePath& path);
std::string to_csv(const RollingSeries& series);

/// Serializes `doc` (with `config` embedded under key "config" when non-null)
/// and writes it atomically. CSV output of a non-tabular record is the
/// flattened key,value form.
void write_report(const Json& doc, const std::filesystem::path& path, ReportFormat format,
                  const Json& config = nullptr);

/// Writes a table record: JSON document or tabular CSV.
template <class Record>
void write_table_report(const Record& record, const std::filesystem::path& path, ReportFormat format,
                        const Json& config = nullptr);

}  // namespace depbreak
