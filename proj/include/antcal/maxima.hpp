#ifndef ANTCAL_MAXIMA_HPP
#define ANTCAL_MAXIMA_HPP

// Training-data extraction from operational signal levels.
//
// The signal is smoothed, preliminary maxima are taken from regions of
// negative curvature, grouped with 1-D mean shift, refined by heavy-ball
// ascent on the smoothed level and merged again. Each surviving maximum
// time t yields the pair (original(t), commanded(t)): where the level peaks,
// the commanded pointing is the locally optimal one for the intended
// direction.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/signalio.hpp"
#include "antcal/text.hpp"
#include "antcal/time.hpp"
#include "antcal/tracktab.hpp"

namespace antcal {

struct MaximaConfig {
  SmoothingConfig smoothing{30.0, 4.0};
  double curvature_threshold = 0.0;   // dBm/s^2, <= 0
  double meanshift_bandwidth = 300.0;  // s
  double hb_step = 1000.0;            // s^2/dBm
  double hb_momentum = 0.8;
  int hb_max_iters = 200;
  double hb_tol = 0.5;  // s
  double merge_bandwidth = 600.0;  // s
  double sanity_bound_deg = 5.0;

  /// Bandwidths tied to the table's block length: one maximum is expected
  /// per original/learned swing.
  static MaximaConfig for_block_duration(double block_s) {
    MaximaConfig c;
    c.meanshift_bandwidth = block_s / 2.0;
    c.merge_bandwidth = block_s;
    return c;
  }

  void validate() const {
    smoothing.validate();
    if (curvature_threshold > 0.0) {
      throw Error(Errc::invalid_argument, "curvature threshold must be <= 0");
    }
    if (!(meanshift_bandwidth > 0.0) || !(merge_bandwidth > 0.0)) {
      throw Error(Errc::invalid_argument, "bandwidths must be positive");
    }
    if (!(hb_step > 0.0)) throw Error(Errc::invalid_argument, "heavy-ball step must be positive");
    if (!(hb_momentum >= 0.0 && hb_momentum < 1.0)) {
      throw Error(Errc::invalid_argument, "heavy-ball momentum must be in [0, 1)");
    }
    if (hb_max_iters < 1) throw Error(Errc::invalid_argument, "need at least one iteration");
    if (!(hb_tol > 0.0)) throw Error(Errc::invalid_argument, "heavy-ball tolerance must be positive");
    if (!(sanity_bound_deg > 0.0)) throw Error(Errc::invalid_argument, "sanity bound must be positive");
  }
};

struct DetectedMaximum {
  double time_s = 0.0;
  double level_dbm = 0.0;
  std::size_t cluster_size = 1;
  bool refined = false;
};

/// Second difference over the actual (possibly uneven) sample spacing.
inline double second_difference(std::span<const double> t, std::span<const double> y,
                                std::size_t i) {
  const double h1 = t[i] - t[i - 1];
  const double h2 = t[i + 1] - t[i];
  return 2.0 * ((y[i + 1] - y[i]) / h2 - (y[i] - y[i - 1]) / h1) / (h1 + h2);
}

/// Candidate maxima of an already smoothed series: in every run of samples
/// whose curvature is below the threshold, the highest sample is kept if it
/// is a local maximum of the series.
inline std::vector<DetectedMaximum> preliminary_maxima(const SignalSeries& s,
                                                       const MaximaConfig& cfg) {
  if (s.size() < 5) throw Error(Errc::series_too_short, "need at least 5 samples");
  const auto t = s.times();
  const auto y = s.levels();
  // curvature below this is rounding noise of the smoothed levels
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::fabs(v));
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  std::vector<DetectedMaximum> out;
  for (const auto& [first, last] : s.segments()) {
    if (last - first < 3) continue;
    std::optional<std::size_t> best;
    auto flush = [&] {
      if (best) {
        const std::size_t i = *best;
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back({t[i], y[i], 1, false});
      }
      best.reset();
    };
    for (std::size_t i = first + 1; i + 1 < last; ++i) {
      const double floor = roundoff / ((t[i] - t[i - 1]) * (t[i + 1] - t[i]));
      if (second_difference(t, y, i) < cfg.curvature_threshold - floor) {
        if (!best || y[i] > y[*best]) best = i;
      } else {
        flush();
      }
    }
    flush();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mean shift

struct Cluster {
  double center = 0.0;
  std::vector<std::size_t> members;  // indices into the input
};

/// One flat-kernel mean-shift update: the mean of all inputs within
/// `bandwidth` of `x` (x itself when the window is empty).
inline double meanshift_step(std::span<const double> times, double x, double bandwidth) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : times) {
    if (std::fabs(v - x) <= bandwidth) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? x : sum / static_cast<double>(n);
}

inline double meanshift_mode(std::span<const double> times, double x, double bandwidth) {
  for (int it = 0; it < 500; ++it) {
    const double next = meanshift_step(times, x, bandwidth);
    const double d = std::fabs(next - x);
    x = next;
    if (d < 1e-9) break;
  }
  return x;
}

/// 1-D mean shift with a flat kernel. Every input climbs to its mode; modes
/// closer than bandwidth/2 are merged and the merged mode is re-converged, so
/// each returned center is a fixed point. Centers come back sorted.
inline std::vector<Cluster> meanshift_cluster(std::span<const double> times, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(Errc::invalid_argument, "bandwidth must be positive");
  std::vector<std::pair<double, std::size_t>> modes;
  modes.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    modes.emplace_back(meanshift_mode(times, times[i], bandwidth), i);
  }
  std::sort(modes.begin(), modes.end());

  std::vector<Cluster> out;
  std::size_t i = 0;
  while (i < modes.size()) {
    std::size_t j = i + 1;
    while (j < modes.size() && modes[j].first - modes[j - 1].first < bandwidth / 2.0) ++j;
    Cluster c;
    double sum = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      c.members.push_back(modes[k].second);
      sum += modes[k].first;
    }
    const bool single_mode = modes[j - 1].first == modes[i].first;
    c.center = single_mode ? modes[i].first
                           : meanshift_mode(times, sum / static_cast<double>(j - i), bandwidth);
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
    i = j;
  }
  // Re-converged centers can coincide; fold them together.
  std::vector<Cluster> merged;
  for (auto& c : out) {
    if (!merged.empty() && std::fabs(c.center - merged.back().center) < bandwidth / 2.0) {
      auto& m = merged.back().members;
      m.insert(m.end(), c.members.begin(), c.members.end());
      std::sort(m.begin(), m.end());
      merged.back().center = meanshift_mode(times, merged.back().center, bandwidth);
    } else {
      merged.push_back(std::move(c));
    }
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Heavy-ball refinement

/// Piecewise-linear level at `t`, held constant beyond the series ends.
inline double interpolate_level(const SignalSeries& s, double t) {
  const auto& x = s.samples();
  if (t <= x.front().time_s) return x.front().level_dbm;
  if (t >= x.back().time_s) return x.back().level_dbm;
  auto it = std::upper_bound(x.begin(), x.end(), t,
                             [](double v, const SignalSample& p) { return v < p.time_s; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double lambda = (t - a.time_s) / (b.time_s - a.time_s);
  return a.level_dbm + lambda * (b.level_dbm - a.level_dbm);
}

struct RefineResult {
  double time_s = 0.0;
  double level_dbm = 0.0;
  bool refined = false;
  int iterations = 0;
};

/// Heavy-ball ascent on the interpolated level:
///   t+ = t + step * g(t) + momentum * (t - t-)
/// with g a central difference over one sample spacing. A move that would
/// lower the level is retried with half the step (and, as a last resort,
/// without momentum), so the result is never below the start level. Stops
/// when a move is shorter than hb_tol. `refined` is set only when it stopped
/// that way on a point of strictly negative curvature.
inline RefineResult heavy_ball_refine(const SignalSeries& s, double start, const MaximaConfig& cfg,
                                      std::optional<std::pair<double, double>> window = {}) {
  if (s.empty()) throw Error(Errc::empty_log, "cannot refine on an empty series");
  double lo = s.start_time();
  double hi = s.end_time();
  if (window) {
    lo = std::max(lo, window->first);
    hi = std::min(hi, window->second);
  }
  if (lo > hi) throw Error(Errc::invalid_argument, "refinement window outside the series");
  const double h = s.spacing();
  auto level = [&](double t) { return interpolate_level(s, t); };
  auto gradient = [&](double t) { return (level(t + h / 2.0) - level(t - h / 2.0)) / h; };

  double cur = std::clamp(start, lo, hi);
  double prev = cur;
  double cur_level = level(cur);
  bool converged = false;
  int it = 0;
  for (; it < cfg.hb_max_iters; ++it) {
    const double g = gradient(cur);
    double momentum = cfg.hb_momentum * (cur - prev);
    double step = cfg.hb_step;
    double next = cur;
    double next_level = cur_level;
    for (int halvings = 0;; ++halvings) {
      const double cand = std::clamp(cur + step * g + momentum, lo, hi);
      const double cand_level = level(cand);
      if (cand_level >= cur_level) {
        next = cand;
        next_level = cand_level;
        break;
      }
      step /= 2.0;
      if (halvings == 60) {
        if (momentum == 0.0) break;
        momentum = 0.0;
        step = cfg.hb_step;
        halvings = 0;
      }
    }
    prev = cur;
    cur = next;
    cur_level = next_level;
    if (std::fabs(cur - prev) < cfg.hb_tol) {
      converged = true;
      ++it;
      break;
    }
  }
  const double curvature = level(cur - h) + level(cur + h) - 2.0 * cur_level;
  return {cur, cur_level, converged && curvature < 0.0, it};
}

// ---------------------------------------------------------------------------
// Training pairs

struct TrainingPair {
  Pointing intended;  // original trajectory pointing
  Pointing actual;    // commanded pointing held at the maximum
  std::optional<double> time_s;
};

struct ExtractionDiagnostics {
  std::vector<DetectedMaximum> preliminary;
  std::vector<DetectedMaximum> clustered;
  std::vector<DetectedMaximum> refined;
  std::vector<DetectedMaximum> merged;
  std::vector<DetectedMaximum> final;
};

struct Extraction {
  std::vector<TrainingPair> pairs;
  std::vector<TrainingPair> dropped;  // failed the per-axis sanity bound
  ExtractionDiagnostics diagnostics;
};

namespace detail {

/// One window per original/learned swing: from the middle of the pointing
/// block before a transition to the middle of the one after it. Schedules
/// without transitions get one window per block.
inline std::vector<std::pair<double, double>> swing_windows(const Schedule& schedule) {
  std::vector<std::pair<double, double>> out;
  auto mid = [](const ScheduleEntry& e) { return 0.5 * (e.start_s + e.end_s); };
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].label != BlockLabel::transition) continue;
    if (i == 0 || i + 1 == schedule.size()) continue;
    out.emplace_back(mid(schedule[i - 1]), mid(schedule[i + 1]));
  }
  if (out.empty()) {
    for (const auto& e : schedule) out.emplace_back(e.start_s, e.end_s);
  }
  return out;
}

}  // namespace detail

/// The full extraction pipeline. Throws span-mismatch when the inputs share no
/// time span and no-maxima-found when nothing survives.
inline Extraction extract_training_set(const SignalSeries& raw, const Schedule& schedule,
                                       const TrackingTable& original,
                                       const TrackingTable& commanded, const MaximaConfig& cfg) {
  cfg.validate();
  if (raw.empty()) throw Error(Errc::empty_log, "empty signal series");
  if (schedule.empty()) throw Error(Errc::span_mismatch, "empty schedule");
  const double lo = std::max({raw.start_time(), static_cast<double>(schedule.front().start_s),
                              static_cast<double>(original.start_time()),
                              static_cast<double>(commanded.start_time())});
  const double hi = std::min({raw.end_time(), static_cast<double>(schedule.back().end_s),
                              static_cast<double>(original.end_time()),
                              static_cast<double>(commanded.end_time())});
  if (!(lo < hi)) throw Error(Errc::span_mismatch, "signal, schedule and tables do not overlap");

  std::vector<SignalSample> within;
  for (const auto& x : raw.samples()) {
    if (x.time_s >= lo && x.time_s <= hi) within.push_back(x);
  }
  if (within.size() < 5) throw Error(Errc::span_mismatch, "too few samples in the common span");
  const SignalSeries smoothed =
      smooth(SignalSeries(std::move(within), raw.nominal_rate(), raw.date()), cfg.smoothing);

  Extraction ex;
  auto& diag = ex.diagnostics;
  diag.preliminary = preliminary_maxima(smoothed, cfg);
  if (diag.preliminary.empty()) throw Error(Errc::no_maxima_found, "no preliminary maxima");

  std::vector<double> times;
  for (const auto& m : diag.preliminary) times.push_back(m.time_s);
  const auto clusters = meanshift_cluster(times, cfg.meanshift_bandwidth);
  for (const auto& c : clusters) {
    double first = std::numeric_limits<double>::infinity();
    double last = -first;
    for (auto k : c.members) {
      first = std::min(first, times[k]);
      last = std::max(last, times[k]);
    }
    diag.clustered.push_back({c.center, interpolate_level(smoothed, c.center), c.members.size(), false});
    const auto r = heavy_ball_refine(
        smoothed, c.center, cfg,
        std::pair{first - cfg.meanshift_bandwidth, last + cfg.meanshift_bandwidth});
    diag.refined.push_back({r.time_s, r.level_dbm, c.members.size(), r.refined});
  }

  // Merge refined positions; a merged group is represented by its best member.
  std::vector<double> refined_times;
  for (const auto& m : diag.refined) refined_times.push_back(m.time_s);
  for (const auto& c : meanshift_cluster(refined_times, cfg.merge_bandwidth)) {
    DetectedMaximum best = diag.refined[c.members.front()];
    std::size_t size = 0;
    for (auto k : c.members) {
      const auto& m = diag.refined[k];
      size += m.cluster_size;
      if (m.level_dbm > best.level_dbm) best = m;
    }
    best.cluster_size = size;
    diag.merged.push_back(best);
  }

  // Keep the strongest maximum of each swing.
  for (const auto& [a, b] : detail::swing_windows(schedule)) {
    const DetectedMaximum* best = nullptr;
    for (const auto& m : diag.merged) {
      if (m.time_s >= a && m.time_s < b && (!best || m.level_dbm > best->level_dbm)) best = &m;
    }
    if (!best) continue;
    if (!diag.final.empty() && best->time_s - diag.final.back().time_s < cfg.merge_bandwidth / 2.0) {
      if (best->level_dbm > diag.final.back().level_dbm) diag.final.back() = *best;
      continue;
    }
    diag.final.push_back(*best);
  }
  if (diag.final.empty()) throw Error(Errc::no_maxima_found, "no maxima inside any swing");

  for (const auto& m : diag.final) {
    TrainingPair p{original.interpolate(m.time_s), commanded.interpolate(m.time_s), m.time_s};
    const double daz = std::fabs(wrap_to_180(p.actual.azimuth_deg() - p.intended.azimuth_deg()));
    const double del = std::fabs(p.actual.elevation_deg() - p.intended.elevation_deg());
    if (daz < cfg.sanity_bound_deg && del < cfg.sanity_bound_deg) {
      ex.pairs.push_back(p);
    } else {
      ex.dropped.push_back(p);
    }
  }
  return ex;
}

/// Per-stage CSV for plotting: stage,time_utc,level_dbm,cluster_size,refined
inline std::string write_diagnostics(const ExtractionDiagnostics& d, std::chrono::sys_days date) {
  std::string out = "stage,time_utc,level_dbm,cluster_size,refined\n";
  auto rows = [&](const char* stage, const std::vector<DetectedMaximum>& v) {
    for (const auto& m : v) {
      out += std::string(stage) + "," + format_iso8601(date, micros_from_seconds(m.time_s)) + "," +
             text::shortest(m.level_dbm) + "," + std::to_string(m.cluster_size) + "," +
             (m.refined ? "1" : "0") + "\n";
    }
  };
  rows("preliminary", d.preliminary);
  rows("clustered", d.clustered);
  rows("refined", d.refined);
  rows("merged", d.merged);
  rows("final", d.final);
  return out;
}

// Pairs CSV:
// [time_utc,]intended_azimuth_deg,intended_elevation_deg,actual_azimuth_deg,actual_elevation_deg

inline std::string write_pairs(std::span<const TrainingPair> pairs, std::chrono::sys_days date) {
  const bool timed = std::all_of(pairs.begin(), pairs.end(),
                                 [](const TrainingPair& p) { return p.time_s.has_value(); });
  std::string out = timed ? "time_utc," : "";
  out += "intended_azimuth_deg,intended_elevation_deg,actual_azimuth_deg,actual_elevation_deg\n";
  for (const auto& p : pairs) {
    if (timed) out += format_iso8601(date, micros_from_seconds(*p.time_s)) + ",";
    out += text::shortest(p.intended.azimuth_deg()) + "," +
           text::shortest(p.intended.elevation_deg()) + "," +
           text::shortest(p.actual.azimuth_deg()) + "," + text::shortest(p.actual.elevation_deg()) +
           "\n";
  }
  return out;
}

inline std::vector<TrainingPair> parse_pairs(std::string_view text) {
  const auto lines = text::split_lines(text);
  std::vector<TrainingPair> out;
  std::optional<bool> timed;
  std::optional<std::chrono::sys_days> date;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto f = text::split(text::trim(lines[i]), ',');
    if (!timed) {
      const bool has_time = !f.empty() && f[0] == "time_utc";
      const std::size_t o = has_time ? 1 : 0;
      if (f.size() != 4 + o || f[o] != "intended_azimuth_deg" ||
          f[o + 1] != "intended_elevation_deg" || f[o + 2] != "actual_azimuth_deg" ||
          f[o + 3] != "actual_elevation_deg") {
        throw Error(Errc::malformed_record, "unexpected pairs header", lineno);
      }
      timed = has_time;
      continue;
    }
    const std::size_t o = *timed ? 1 : 0;
    if (f.size() != 4 + o) throw Error(Errc::malformed_record, "wrong field count", lineno);
    double v[4];
    for (int k = 0; k < 4; ++k) {
      const auto d = text::to_double(f[o + k]);
      if (!d) throw Error(Errc::malformed_record, "bad number", lineno);
      v[k] = *d;
    }
    TrainingPair p;
    try {
      p.intended = Pointing(v[0], v[1]);
      p.actual = Pointing(v[2], v[3]);
    } catch (const Error& e) {
      throw Error(Errc::malformed_record, e.what(), lineno);
    }
    if (*timed) {
      const auto stamp = parse_iso8601(f[0]);
      if (!stamp) throw Error(Errc::malformed_record, "bad timestamp", lineno);
      if (!date) date = stamp->date;
      p.time_s = static_cast<double>((stamp->date - *date).count()) * kSecondsPerDay +
                 seconds_from_micros(stamp->micros_of_day);
    }
    out.push_back(p);
  }
  if (!timed) throw Error(Errc::malformed_record, "pairs file has no header");
  return out;
}

}  // namespace antcal

#endif  // ANTCAL_MAXIMA_HPP
