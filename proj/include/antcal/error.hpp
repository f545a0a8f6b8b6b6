#ifndef ANTCAL_ERROR_HPP
#define ANTCAL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace antcal {

enum class Errc {
  invalid_argument,
  out_of_range_angle,
  malformed_line,
  non_monotonic_time,
  point_count,
  out_of_range_time,
  plan_invalid,
  plan_overflow,
  nonpositive_power,
  length_mismatch,
  malformed_record,
  empty_log,
  series_too_short,
  span_mismatch,
  no_maxima_found,
  too_few_pairs,
  rank_deficient,
  singular_block,
  invalid_window,
  io,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::out_of_range_angle: return "out-of-range-angle";
    case Errc::malformed_line: return "malformed-line";
    case Errc::non_monotonic_time: return "non-monotonic-time";
    case Errc::point_count: return "point-count";
    case Errc::out_of_range_time: return "out-of-range-time";
    case Errc::plan_invalid: return "plan-invalid";
    case Errc::plan_overflow: return "plan-overflow";
    case Errc::nonpositive_power: return "nonpositive-power";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::malformed_record: return "malformed-record";
    case Errc::empty_log: return "empty-log";
    case Errc::series_too_short: return "series-too-short";
    case Errc::span_mismatch: return "span-mismatch";
    case Errc::no_maxima_found: return "no-maxima-found";
    case Errc::too_few_pairs: return "too-few-pairs";
    case Errc::rank_deficient: return "rank-deficient";
    case Errc::singular_block: return "singular-block";
    case Errc::invalid_window: return "invalid-window";
    case Errc::io: return "io";
  }
  return "unknown";
}

/// Every failure in the library is reported through this type. `line()` is
/// the 1-based input line for parser errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(format(code, what, line)), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(Errc code, const std::string& what, std::size_t line) {
    std::string s = errc_name(code);
    if (line != 0) s += " (line " + std::to_string(line) + ")";
    s += ": ";
    s += what;
    return s;
  }

  Errc code_;
  std::size_t line_;
};

}  // namespace antcal

#endif  // ANTCAL_ERROR_HPP
