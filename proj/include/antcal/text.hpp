#ifndef ANTCAL_TEXT_HPP
#define ANTCAL_TEXT_HPP

// Small text helpers shared by the file formats.

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace antcal::text {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < s.size()) out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto d = s.find(delim, pos);
    out.push_back(trim(s.substr(pos, d == std::string_view::npos ? s.npos : d - pos)));
    if (d == std::string_view::npos) break;
    pos = d + 1;
  }
  return out;
}

inline bool is_blank_or_comment(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed-point text with `decimals` digits.
inline std::string fixed(double v, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

/// Rounds `v` half-up on its shortest decimal representation, so 119.275
/// becomes "119.28" even though the binary value sits just below the tie.
inline std::string round_half_up(double v, int decimals) {
  const bool negative = v < 0;
  std::string digits = shortest(std::fabs(v));
  if (digits.find_first_of("eE") != std::string::npos) return fixed(v, decimals);
  auto dot = digits.find('.');
  if (dot == std::string::npos) {
    digits += '.';
    dot = digits.size() - 1;
  }
  std::string intpart = digits.substr(0, dot);
  std::string frac = digits.substr(dot + 1);
  const bool round_up =
      frac.size() > static_cast<std::size_t>(decimals) && frac[decimals] >= '5';
  frac.resize(decimals, '0');
  std::string all = intpart + frac;
  if (round_up) {
    int i = static_cast<int>(all.size()) - 1;
    for (; i >= 0; --i) {
      if (all[i] == '9') {
        all[i] = '0';
      } else {
        ++all[i];
        break;
      }
    }
    if (i < 0) all.insert(all.begin(), '1');
  }
  std::string out = all.substr(0, all.size() - decimals);
  if (decimals > 0) out += "." + all.substr(all.size() - decimals);
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

}  // namespace antcal::text

#endif  // ANTCAL_TEXT_HPP
