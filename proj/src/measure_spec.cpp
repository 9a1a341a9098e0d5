#include "depbreak/measure_spec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "depbreak/error.hpp"

namespace depbreak {
namespace {

std::string format_level(double q) {
  // Shortest round-trip form, with a trailing zero for one-decimal levels so
  // that q0.1 renders as "q0.10".
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, q);
  std::string s(buf, res.ptr);
  auto dot = s.find('.');
  if (dot != std::string::npos && s.size() - dot == 2) s.push_back('0');
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> split_tokens(std::string_view text) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    std::string_view raw = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    std::string_view t = trim(raw);
    std::size_t lead = static_cast<std::size_t>(t.data() - raw.data());
    out.push_back({t, start + (t.empty() ? 0 : lead)});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_preset_token(std::string_view t) {
  return t.size() == 2 && t[0] == 'm' && t[1] >= '1' && t[1] <= '5';
}

Measure parse_item(const Token& tok) {
  const auto at = " at position " + std::to_string(tok.offset);
  if (tok.text == "rho") return Measure::rho();
  if (tok.text.size() >= 2 && tok.text[0] == 'q') {
    std::string_view num = tok.text.substr(1);
    double q = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), q,
                                     std::chars_format::fixed);
    if (ec != std::errc{} || ptr != num.data() + num.size())
      throw Error(ErrorCode::ParseError,
                  "malformed quantile level '" + std::string(tok.text) + "'" + at);
    if (!(q > 0.0 && q < 1.0))
      throw Error(ErrorCode::LevelOutOfRange,
                  "quantile level " + std::string(num) + " not in (0,1)" + at);
    return Measure::quantile(q);
  }
  throw Error(ErrorCode::ParseError, "unknown measure token '" + std::string(tok.text) + "'" + at);
}

}  // namespace

std::string Measure::label() const { return is_rho() ? "rho" : "q" + format_level(level); }

MeasureSpec::MeasureSpec(std::vector<Measure> items) : items_(std::move(items)) {
  if (items_.empty()) throw Error(ErrorCode::InvalidArgument, "measure spec is empty");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Measure& m = items_[i];
    if (m.kind == Measure::Kind::Quantile && !(m.level > 0.0 && m.level < 1.0))
      throw Error(ErrorCode::LevelOutOfRange, "quantile level not in (0,1)");
    if (m.is_rho()) items_[i].level = 0.0;
    for (std::size_t j = 0; j < i; ++j)
      if (items_[j] == items_[i])
        throw Error(ErrorCode::InvalidArgument, "duplicate measure " + m.label());
  }
}

MeasureSpec MeasureSpec::preset(int index) {
  using M = Measure;
  switch (index) {
    case 1: return MeasureSpec({M::rho(), M::quantile(0.05), M::quantile(0.10), M::quantile(0.90), M::quantile(0.95)});
    case 2: return MeasureSpec({M::quantile(0.05), M::quantile(0.10), M::quantile(0.90), M::quantile(0.95)});
    case 3: return MeasureSpec({M::quantile(0.90), M::quantile(0.95)});
    case 4: return MeasureSpec({M::quantile(0.05), M::quantile(0.10)});
    case 5: return MeasureSpec({M::rho()});
    default: throw Error(ErrorCode::InvalidArgument, "preset index must be 1..5");
  }
}

double MeasureSpec::min_tail_mass() const noexcept {
  double m = 0.5;
  for (const auto& it : items_)
    if (!it.is_rho()) m = std::min(m, std::min(it.level, 1.0 - it.level));
  return m;
}

std::string MeasureSpec::to_string() const {
  std::string out;
  for (const auto& it : items_) {
    if (!out.empty()) out.push_back(',');
    out += it.label();
  }
  return out;
}

MeasureSpec parse_measure_spec(std::string_view text) {
  auto tokens = split_tokens(text);
  if (tokens.size() == 1 && is_preset_token(tokens[0].text))
    return MeasureSpec::preset(tokens[0].text[1] - '0');
  std::vector<Measure> items;
  for (const auto& tok : tokens) {
    if (tok.text.empty())
      throw Error(ErrorCode::ParseError, "empty measure token at position " + std::to_string(tok.offset));
    if (is_preset_token(tok.text))
      throw Error(ErrorCode::ParseError,
                  "preset '" + std::string(tok.text) + "' cannot be mixed with measure tokens at position " +
                      std::to_string(tok.offset));
    Measure m = parse_item(tok);
    if (std::find(items.begin(), items.end(), m) != items.end())
      throw Error(ErrorCode::ParseError,
                  "duplicate measure '" + std::string(tok.text) + "' at position " + std::to_string(tok.offset));
    items.push_back(m);
  }
  return MeasureSpec(std::move(items));
}

std::vector<MeasureSpec> parse_measure_spec_list(std::string_view text) {
  auto tokens = split_tokens(text);
  bool all_presets = std::all_of(tokens.begin(), tokens.end(),
                                 [](const Token& t) { return is_preset_token(t.text); });
  if (!all_presets) return {parse_measure_spec(text)};
  std::vector<MeasureSpec> out;
  for (const auto& t : tokens) out.push_back(MeasureSpec::preset(t.text[1] - '0'));
  return out;
}

MeasureSpec merge_specs(const std::vector<MeasureSpec>& specs) {
  std::vector<Measure> items;
  for (const auto& s : specs)
    for (const auto& m : s.items())
      if (std::find(items.begin(), items.end(), m) == items.end()) items.push_back(m);
  return MeasureSpec(std::move(items));
}

std::vector<std::size_t> item_positions(const MeasureSpec& whole, const MeasureSpec& part) {
  std::vector<std::size_t> pos;
  for (const auto& m : part.items()) {
    auto it = std::find(whole.items().begin(), whole.items().end(), m);
    if (it == whole.items().end())
      throw Error(ErrorCode::InvalidArgument, "measure " + m.label() + " missing from merged spec");
    pos.push_back(static_cast<std::size_t>(it - whole.items().begin()));
  }
  return pos;
}

}  // namespace depbreak
