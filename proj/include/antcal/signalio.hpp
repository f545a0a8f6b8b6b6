#ifndef ANTCAL_SIGNALIO_HPP
#define ANTCAL_SIGNALIO_HPP

// Signal-level monitoring data: dBm conversion, the CSV log format, Gaussian
// smoothing and error metrics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/text.hpp"
#include "antcal/time.hpp"

namespace antcal {

inline double dbm_from_mw(double p_mw) {
  if (!(p_mw > 0.0)) throw Error(Errc::nonpositive_power, "power must be positive");
  return 10.0 * std::log10(p_mw);
}

inline double mw_from_dbm(double x_dbm) { return std::pow(10.0, x_dbm / 10.0); }

struct SignalSample {
  double time_s = 0.0;  // seconds since midnight of the series date
  double level_dbm = 0.0;
  std::optional<Pointing> pointing;  // antenna pointing, when reported

  friend bool operator==(const SignalSample&, const SignalSample&) = default;
};

class SignalSeries {
 public:
  /// Gaps wider than this many nominal spacings split the series.
  static constexpr double kGapFactor = 5.0;

  SignalSeries() = default;

  /// Validates ordering and finiteness. A non-positive `nominal_rate` is
  /// derived from the median sample spacing.
  explicit SignalSeries(std::vector<SignalSample> samples, double nominal_rate = 0.0,
                        std::chrono::sys_days date = {})
      : samples_(std::move(samples)), date_(date) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i].level_dbm) || !std::isfinite(samples_[i].time_s)) {
        throw Error(Errc::malformed_record, "non-finite sample", i + 1);
      }
      if (i > 0 && samples_[i].time_s <= samples_[i - 1].time_s) {
        throw Error(Errc::non_monotonic_time, "sample times must increase strictly", i + 1);
      }
    }
    rate_ = nominal_rate > 0.0 ? nominal_rate : median_rate(samples_);
  }

  const std::vector<SignalSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double nominal_rate() const noexcept { return rate_; }
  double spacing() const noexcept { return 1.0 / rate_; }
  std::chrono::sys_days date() const noexcept { return date_; }
  double start_time() const { return samples_.front().time_s; }
  double end_time() const { return samples_.back().time_s; }

  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(samples_.size());
    for (const auto& s : samples_) t.push_back(s.time_s);
    return t;
  }

  std::vector<double> levels() const {
    std::vector<double> v;
    v.reserve(samples_.size());
    for (const auto& s : samples_) v.push_back(s.level_dbm);
    return v;
  }

  /// Copy with the levels replaced (same times, pointings and rate).
  SignalSeries with_levels(std::span<const double> levels) const {
    if (levels.size() != samples_.size()) {
      throw Error(Errc::length_mismatch, "level count differs from sample count");
    }
    SignalSeries out = *this;
    for (std::size_t i = 0; i < levels.size(); ++i) out.samples_[i].level_dbm = levels[i];
    return out;
  }

  /// Half-open index ranges [first, last) of gap-free runs.
  std::vector<std::pair<std::size_t, std::size_t>> segments() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (samples_.empty()) return out;
    std::size_t first = 0;
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (samples_[i].time_s - samples_[i - 1].time_s > kGapFactor * spacing()) {
        out.emplace_back(first, i);
        first = i;
      }
    }
    out.emplace_back(first, samples_.size());
    return out;
  }

  /// Indices i where the step from sample i-1 to i is a gap.
  std::vector<std::size_t> gaps() const {
    std::vector<std::size_t> out;
    const auto segs = segments();
    for (std::size_t k = 1; k < segs.size(); ++k) out.push_back(segs[k].first);
    return out;
  }

  friend bool operator==(const SignalSeries&, const SignalSeries&) = default;

 private:
  static double median_rate(const std::vector<SignalSample>& s) {
    if (s.size() < 2) return 1.0;
    std::vector<double> d;
    d.reserve(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i) d.push_back(s[i].time_s - s[i - 1].time_s);
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    // times carry microseconds, so a whole-Hz rate shows up slightly off
    const double rate = 1.0 / *mid;
    const double whole = std::round(rate);
    if (whole >= 1.0 && std::fabs(rate - whole) <= 1.01e-6 * rate * rate) return whole;
    return rate;
  }

  std::vector<SignalSample> samples_;
  double rate_ = 1.0;
  std::chrono::sys_days date_{};
};

// ---------------------------------------------------------------------------
// Smoothing

struct SmoothingConfig {
  double sigma_seconds = 5.0;
  double truncation = 4.0;  // kernel half-width in sigmas

  void validate() const {
    if (!(sigma_seconds > 0.0)) throw Error(Errc::invalid_argument, "sigma must be positive");
    if (!(truncation >= 3.0)) throw Error(Errc::invalid_argument, "truncation must be >= 3 sigma");
  }
};

/// Unnormalized Gaussian weights for offsets 0..half-width in samples.
inline std::vector<double> gaussian_half_kernel(double sigma_samples, double truncation) {
  const auto half = static_cast<std::size_t>(std::ceil(truncation * sigma_samples));
  std::vector<double> w(half + 1);
  for (std::size_t j = 0; j <= half; ++j) {
    const double x = static_cast<double>(j) / sigma_samples;
    w[j] = std::exp(-0.5 * x * x);
  }
  return w;
}

/// Gaussian low-pass over sample indices; sigma is converted to samples via
/// the nominal rate. Each gap-free segment is filtered on its own and the
/// kernel is renormalized where it is cut by a segment end.
inline SignalSeries smooth(const SignalSeries& s, const SmoothingConfig& cfg) {
  cfg.validate();
  if (s.empty()) throw Error(Errc::empty_log, "cannot smooth an empty series");
  const auto w = gaussian_half_kernel(cfg.sigma_seconds * s.nominal_rate(), cfg.truncation);
  const auto half = static_cast<std::ptrdiff_t>(w.size() - 1);
  const auto in = s.levels();
  std::vector<double> out(in.size());
  for (const auto& [first, last] : s.segments()) {
    const auto lo = static_cast<std::ptrdiff_t>(first);
    const auto hi = static_cast<std::ptrdiff_t>(last);
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
      const std::ptrdiff_t a = std::max(lo, i - half);
      const std::ptrdiff_t b = std::min(hi - 1, i + half);
      double acc = 0.0;
      double norm = 0.0;
      for (std::ptrdiff_t j = a; j <= b; ++j) {
        const double wj = w[static_cast<std::size_t>(std::abs(j - i))];
        acc += wj * in[static_cast<std::size_t>(j)];
        norm += wj;
      }
      out[static_cast<std::size_t>(i)] = acc / norm;
    }
  }
  return s.with_levels(out);
}

// ---------------------------------------------------------------------------
// Metrics

struct ErrorMetrics {
  double mae = 0.0;
  double mse = 0.0;
};

inline ErrorMetrics mae_mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::length_mismatch, "metric inputs differ in length");
  if (a.empty()) throw Error(Errc::length_mismatch, "metric inputs are empty");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    abs_sum += std::fabs(d);
    sq_sum += d * d;
  }
  const auto n = static_cast<double>(a.size());
  return {abs_sum / n, sq_sum / n};
}

struct MetricRow {
  std::string label;
  ErrorMetrics metrics;
};

/// Training-error table: one row per axis, MAE and MSE with 6 decimals.
inline std::string format_error_table(std::span<const MetricRow> rows) {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  auto lpad = [](const std::string& s, std::size_t n) {
    return s.size() >= n ? s : std::string(n - s.size(), ' ') + s;
  };
  std::string out = pad("axis", width) + "  " + lpad("MAE", 10) + "  " + lpad("MSE", 10) + "\n";
  for (const auto& r : rows) {
    out += pad(r.label, width) + "  " + lpad(text::fixed(r.metrics.mae, 6), 10) + "  " +
           lpad(text::fixed(r.metrics.mse, 6), 10) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Log format: time_utc,level_dbm[,azimuth_deg,elevation_deg]

/// Parses a monitoring log. Times become seconds since midnight of the first
/// record's date. Records must already be in time order.
inline SignalSeries ingest_log(std::string_view text) {
  const auto lines = text::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && text::is_blank_or_comment(lines[i])) ++i;
  if (i == lines.size()) throw Error(Errc::empty_log, "log has no header");
  const auto header = text::split(text::trim(lines[i]), ',');
  bool with_pointing = false;
  if (header.size() == 4 && header[2] == "azimuth_deg" && header[3] == "elevation_deg") {
    with_pointing = true;
  } else if (header.size() != 2) {
    throw Error(Errc::malformed_record, "unexpected header", i + 1);
  }
  if (header[0] != "time_utc" || header[1] != "level_dbm") {
    throw Error(Errc::malformed_record, "header must start with 'time_utc,level_dbm'", i + 1);
  }

  std::vector<SignalSample> samples;
  std::optional<std::chrono::sys_days> date;
  for (++i; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto f = text::split(text::trim(lines[i]), ',');
    if (f.size() != header.size()) {
      throw Error(Errc::malformed_record,
                  "expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(f.size()),
                  lineno);
    }
    const auto stamp = parse_iso8601(f[0]);
    if (!stamp) throw Error(Errc::malformed_record, "bad timestamp", lineno);
    const auto level = text::to_double(f[1]);
    if (!level) throw Error(Errc::malformed_record, "bad level", lineno);
    if (!date) date = stamp->date;
    const std::int64_t day_us = static_cast<std::int64_t>(kSecondsPerDay) * 1'000'000;
    const std::int64_t us = (stamp->date - *date).count() * day_us + stamp->micros_of_day;
    SignalSample s{seconds_from_micros(us), *level, std::nullopt};
    if (with_pointing) {
      const auto az = text::to_double(f[2]);
      const auto el = text::to_double(f[3]);
      if (!az || !el) throw Error(Errc::malformed_record, "bad pointing", lineno);
      try {
        s.pointing = Pointing(*az, *el);
      } catch (const Error& e) {
        throw Error(Errc::malformed_record, e.what(), lineno);
      }
    }
    if (!samples.empty() && s.time_s <= samples.back().time_s) {
      throw Error(Errc::non_monotonic_time, "log times must increase strictly", lineno);
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw Error(Errc::empty_log, "log has no records");
  return SignalSeries(std::move(samples), 0.0, *date);
}

/// Inverse of ingest_log; levels and angles use shortest round-trip text.
inline std::string write_log(const SignalSeries& s) {
  const bool with_pointing =
      !s.empty() && std::all_of(s.samples().begin(), s.samples().end(),
                                [](const SignalSample& x) { return x.pointing.has_value(); });
  std::string out = with_pointing ? "time_utc,level_dbm,azimuth_deg,elevation_deg\n"
                                  : "time_utc,level_dbm\n";
  for (const auto& x : s.samples()) {
    out += format_iso8601(s.date(), micros_from_seconds(x.time_s));
    out += ",";
    out += text::shortest(x.level_dbm);
    if (with_pointing) {
      out += "," + text::shortest(x.pointing->azimuth_deg()) + "," +
             text::shortest(x.pointing->elevation_deg());
    }
    out += "\n";
  }
  return out;
}

}  // namespace antcal

#endif  // ANTCAL_SIGNALIO_HPP
