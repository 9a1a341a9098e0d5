#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "depbreak/panel.hpp"

namespace depbreak {

struct NoDateColumn {};

struct LoadOptions {
  bool has_header = true;
  /// Column index, column name (needs a header), or NoDateColumn for undated data.
  std::variant<std::size_t, std::string, NoDateColumn> date_column = std::size_t{0};
  /// Auto-detected among ',', ';' and '\t' when empty.
  std::optional<char> delimiter;
};

/// Reads a delimiter-separated panel. Columns other than the date column become
/// series in file order. Blank lines are skipped; missing or non-numeric cells
/// are errors (UnparseableCell names row and column).
ReturnPanel load_panel(const std::filesystem::path& path, const LoadOptions& options = {});

/// Same as load_panel over in-memory text.
ReturnPanel parse_panel(std::string_view text, const LoadOptions& options = {});

/// value[t][i] = ln(price[t+1][i]) - ln(price[t][i]); dates are the later date of each pair.
ReturnPanel to_log_returns(const ReturnPanel& prices);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

/// Header "date,<names>" (no date column when the panel is undated); numbers in
/// round-trip form.
std::string panel_to_csv(const ReturnPanel& panel, char delimiter = ',');
void write_panel(const ReturnPanel& panel, const std::filesystem::path& path, char delimiter = ',');

/// Writes to a temporary sibling and renames it over `path`, so readers never
/// see a partial file. Throws IoFailure.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace depbreak
