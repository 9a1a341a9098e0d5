#include "depbreak/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "depbreak/error.hpp"

namespace depbreak {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

char detect_delimiter(std::string_view line) {
  const std::size_t commas = std::count(line.begin(), line.end(), ',');
  const std::size_t semis = std::count(line.begin(), line.end(), ';');
  const std::size_t tabs = std::count(line.begin(), line.end(), '\t');
  if (tabs >= commas && tabs >= semis && tabs > 0) return '\t';
  if (semis > commas) return ';';
  return ',';
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string_view line = text.substr(start, pos - start);
    if (!trim(line).empty()) out.push_back(line);
    start = pos + 1;
  }
  return out;
}

}  // namespace

ReturnPanel parse_panel(std::string_view text, const LoadOptions& options) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::TooFewRows, "input has no rows");
  const char delim = options.delimiter.value_or(detect_delimiter(lines.front()));
  const std::size_t arity = split(lines.front(), delim).size();

  std::vector<std::string> header;
  if (options.has_header)
    for (auto cell : split(lines.front(), delim)) header.emplace_back(cell);

  std::optional<std::size_t> date_col;
  if (const auto* idx = std::get_if<std::size_t>(&options.date_column)) {
    if (*idx >= arity) throw Error(ErrorCode::InvalidArgument, "date column index " + std::to_string(*idx) + " out of range");
    date_col = *idx;
  } else if (const auto* name = std::get_if<std::string>(&options.date_column)) {
    if (!options.has_header) throw Error(ErrorCode::InvalidArgument, "date column by name needs a header row");
    auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw Error(ErrorCode::InvalidArgument, "no column named '" + *name + "'");
    date_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::size_t> value_cols;
  for (std::size_t c = 0; c < arity; ++c)
    if (c != date_col) value_cols.push_back(c);
  if (value_cols.size() < 2)
    throw Error(ErrorCode::TooFewColumns, "need at least two series, found " + std::to_string(value_cols.size()));

  const std::size_t first = options.has_header ? 1 : 0;
  const std::size_t T = lines.size() - first;
  if (T < 2) throw Error(ErrorCode::TooFewRows, "need at least two data rows, found " + std::to_string(T));

  ReturnPanel panel;
  panel.values = Matrix(T, value_cols.size());
  for (std::size_t c : value_cols)
    panel.names.push_back(options.has_header ? header[c] : "x" + std::to_string(panel.names.size() + 1));

  for (std::size_t r = 0; r < T; ++r) {
    const std::size_t line_no = first + r + 1;
    const auto cells = split(lines[first + r], delim);
    if (cells.size() != arity)
      throw Error(ErrorCode::UnparseableCell, "row " + std::to_string(line_no) + " has " +
                                                  std::to_string(cells.size()) + " cells, expected " +
                                                  std::to_string(arity));
    if (date_col) {
      auto d = parse_date(cells[*date_col]);
      if (!d)
        throw Error(ErrorCode::UnparseableCell, "row " + std::to_string(line_no) + ", column " +
                                                    std::to_string(*date_col + 1) + ": bad date '" +
                                                    std::string(cells[*date_col]) + "'");
      if (!panel.dates.empty() && !(panel.dates.back() < *d))
        throw Error(ErrorCode::NonMonotoneDates, "row " + std::to_string(line_no) + ": date " + format_date(*d) +
                                                     " does not follow " + format_date(panel.dates.back()));
      panel.dates.push_back(*d);
    }
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      double v = 0.0;
      if (!parse_double(cells[value_cols[k]], v))
        throw Error(ErrorCode::UnparseableCell, "row " + std::to_string(line_no) + ", column " +
                                                    std::to_string(value_cols[k] + 1) + " (" + panel.names[k] +
                                                    "): '" + std::string(cells[value_cols[k]]) + "'");
      panel.values(r, k) = v;
    }
  }
  return panel;
}

ReturnPanel load_panel(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_panel(buf.str(), options);
}

ReturnPanel to_log_returns(const ReturnPanel& prices) {
  const std::size_t T = prices.T(), N = prices.N();
  if (T < 2) throw Error(ErrorCode::TooFewRows, "need at least two prices");
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t r = 0; r < T; ++r)
      if (!(prices.values(r, c) > 0.0))
        throw Error(ErrorCode::NonPositivePrice, "row " + std::to_string(r + 1) + ", column " +
                                                     std::to_string(c + 1) + " is not a positive price");
  ReturnPanel out;
  out.names = prices.names;
  if (!prices.dates.empty()) out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.values = Matrix(T - 1, N);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t r = 0; r + 1 < T; ++r)
      out.values(r, c) = std::log(prices.values(r + 1, c) / prices.values(r, c));
  return out;
}

std::string format_number(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string panel_to_csv(const ReturnPanel& panel, char delimiter) {
  const bool dated = !panel.dates.empty();
  std::string out;
  if (dated) out += "date";
  for (std::size_t c = 0; c < panel.N(); ++c) {
    if (dated || c > 0) out += delimiter;
    out += c < panel.names.size() ? panel.names[c] : "x" + std::to_string(c + 1);
  }
  out += '\n';
  for (std::size_t r = 0; r < panel.T(); ++r) {
    if (dated) out += format_date(panel.dates[r]);
    for (std::size_t c = 0; c < panel.N(); ++c) {
      if (dated || c > 0) out += delimiter;
      out += format_number(panel.values(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& path, char delimiter) {
  write_text_atomic(path, panel_to_csv(panel, delimiter));
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::IoFailure, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace depbreak
