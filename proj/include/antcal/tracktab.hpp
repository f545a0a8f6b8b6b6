#ifndef ANTCAL_TRACKTAB_HPP
#define ANTCAL_TRACKTAB_HPP

// Tracking tables: the antenna's file interface. A table is a list of
// (UTC time-of-day, azimuth, elevation) records; the antenna moves linearly
// between consecutive records.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/text.hpp"
#include "antcal/time.hpp"

namespace antcal {

struct TrackPoint {
  int time_s = 0;  // seconds of the UTC day
  Pointing pointing;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

class TrackingTable {
 public:
  static constexpr std::size_t kMaxPoints = 100;

  explicit TrackingTable(std::vector<TrackPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw Error(Errc::point_count, "a tracking table needs at least 2 points");
    }
    if (points_.size() > kMaxPoints) {
      throw Error(Errc::point_count, std::to_string(points_.size()) + " points exceed the limit of " +
                                         std::to_string(kMaxPoints));
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].time_s < 0 || points_[i].time_s >= kSecondsPerDay) {
        throw Error(Errc::out_of_range_time, "track point time outside one UTC day");
      }
      if (i > 0 && points_[i].time_s <= points_[i - 1].time_s) {
        throw Error(Errc::non_monotonic_time,
                    "track point " + std::to_string(i + 1) + " is not after its predecessor");
      }
    }
  }

  const std::vector<TrackPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  int start_time() const { return points_.front().time_s; }
  int end_time() const { return points_.back().time_s; }
  bool covers(double t) const { return t >= start_time() && t <= end_time(); }

  /// Piecewise-linear pointing at time `t` (seconds of day). Azimuth follows
  /// the shorter way round between nodes, so tracks through north work.
  Pointing interpolate(double t) const {
    if (!covers(t)) {
      throw Error(Errc::out_of_range_time, "time " + std::to_string(t) + " outside table span [" +
                                               format_hms(start_time()) + ", " +
                                               format_hms(end_time()) + "]");
    }
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const TrackPoint& p) { return v < p.time_s; });
    if (it == points_.end()) return points_.back().pointing;
    if (it == points_.begin()) return points_.front().pointing;
    const TrackPoint& b = *it;
    const TrackPoint& a = *(it - 1);
    if (t == a.time_s) return a.pointing;
    const double lambda = (t - a.time_s) / static_cast<double>(b.time_s - a.time_s);
    const double daz = wrap_to_180(b.pointing.azimuth_deg() - a.pointing.azimuth_deg());
    const double del = b.pointing.elevation_deg() - a.pointing.elevation_deg();
    return Pointing(a.pointing.azimuth_deg() + lambda * daz,
                    a.pointing.elevation_deg() + lambda * del);
  }

  friend bool operator==(const TrackingTable&, const TrackingTable&) = default;

 private:
  std::vector<TrackPoint> points_;
};

/// Parses `HH:MM:SS az el` records; blank and `#` lines are skipped.
inline TrackingTable parse_tracking_table(std::string_view text) {
  std::vector<TrackPoint> points;
  const auto lines = text::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto fields = text::split_ws(lines[i]);
    if (fields.size() != 3) {
      throw Error(Errc::malformed_line, "expected 'HH:MM:SS azimuth elevation'", lineno);
    }
    const auto t = parse_hms(fields[0]);
    const auto az = text::to_double(fields[1]);
    const auto el = text::to_double(fields[2]);
    if (!t || !az || !el) throw Error(Errc::malformed_line, "unparsable field", lineno);
    if (*az < 0.0 || *az > 360.0) {
      throw Error(Errc::out_of_range_angle, "azimuth outside [0, 360]", lineno);
    }
    if (*el < kMinElevationDeg || *el > kMaxElevationDeg) {
      throw Error(Errc::out_of_range_angle, "elevation outside [-10, 90]", lineno);
    }
    if (!points.empty() && *t <= points.back().time_s) {
      throw Error(Errc::non_monotonic_time, "time does not increase", lineno);
    }
    if (points.size() == TrackingTable::kMaxPoints) {
      throw Error(Errc::point_count, "more than 100 track points", lineno);
    }
    points.push_back({*t, Pointing(*az, *el)});
  }
  return TrackingTable(std::move(points));
}

/// Two-decimal angle text, rounding half up.
inline std::string format_angle(double deg) { return text::round_half_up(deg, 2); }

inline std::string serialize(const TrackingTable& table) {
  std::string out;
  for (const auto& p : table.points()) {
    std::string az = format_angle(p.pointing.azimuth_deg());
    if (az == "360.00") az = "0.00";
    out += format_hms(p.time_s) + " " + az + " " + format_angle(p.pointing.elevation_deg()) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternating calibration tables

enum class BlockLabel { original, learned, transition };

inline const char* label_name(BlockLabel l) {
  switch (l) {
    case BlockLabel::original: return "original";
    case BlockLabel::learned: return "learned";
    case BlockLabel::transition: return "transition";
  }
  return "?";
}

struct IntervalPlan {
  int block_duration_s = 600;
  std::vector<BlockLabel> labels;

  /// original, transition, learned, transition, ... covering `span_s`
  /// seconds. A trailing transition is folded into the block before it so
  /// the plan always ends on a pointing block; the last block may be short.
  static IntervalPlan alternating(int block_duration_s, int span_s) {
    if (block_duration_s <= 0 || span_s <= 0) {
      throw Error(Errc::plan_invalid, "block duration and span must be positive");
    }
    static constexpr std::array kCycle = {BlockLabel::original, BlockLabel::transition,
                                          BlockLabel::learned, BlockLabel::transition};
    IntervalPlan plan{block_duration_s, {}};
    const int n = (span_s + block_duration_s - 1) / block_duration_s;
    for (int i = 0; i < n; ++i) plan.labels.push_back(kCycle[i % kCycle.size()]);
    if (plan.labels.back() == BlockLabel::transition) plan.labels.pop_back();
    return plan;
  }

  /// Transitions must sit between one original and one learned block.
  void validate() const {
    if (block_duration_s <= 0) throw Error(Errc::plan_invalid, "block duration must be positive");
    if (labels.empty()) throw Error(Errc::plan_invalid, "empty plan");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != BlockLabel::transition) {
        if (i + 1 < labels.size() && labels[i + 1] != BlockLabel::transition &&
            labels[i + 1] != labels[i]) {
          throw Error(Errc::plan_invalid, "original and learned blocks must be separated by a transition");
        }
        continue;
      }
      if (i == 0 || i + 1 == labels.size()) {
        throw Error(Errc::plan_invalid, "a plan cannot start or end with a transition");
      }
      const auto before = labels[i - 1];
      const auto after = labels[i + 1];
      if (before == BlockLabel::transition || after == BlockLabel::transition || before == after) {
        throw Error(Errc::plan_invalid, "a transition must join an original and a learned block");
      }
    }
  }
};

struct ScheduleEntry {
  int start_s = 0;
  int end_s = 0;
  BlockLabel label = BlockLabel::original;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

using Schedule = std::vector<ScheduleEntry>;

inline double block_duration(const Schedule& s) {
  if (s.empty()) return 0.0;
  std::vector<int> d;
  for (const auto& e : s) d.push_back(e.end_s - e.start_s);
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return d[d.size() / 2];
}

inline std::size_t count_label(const Schedule& s, BlockLabel l) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [l](const ScheduleEntry& e) { return e.label == l; }));
}

/// Label of the block containing `t`; a boundary belongs to the later block.
inline std::optional<BlockLabel> label_at(const Schedule& s, double t) {
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (t >= it->start_s && t <= it->end_s) return it->label;
  }
  return std::nullopt;
}

inline std::string serialize_schedule(const Schedule& s) {
  std::string out = "start_utc,end_utc,label\n";
  for (const auto& e : s) {
    out += format_hms(e.start_s) + "," + format_hms(e.end_s) + "," + label_name(e.label) + "\n";
  }
  return out;
}

inline Schedule parse_schedule(std::string_view text) {
  Schedule s;
  const auto lines = text::split_lines(text);
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto f = text::split(text::trim(lines[i]), ',');
    if (!header) {
      if (f.size() != 3 || f[0] != "start_utc" || f[1] != "end_utc" || f[2] != "label") {
        throw Error(Errc::malformed_line, "expected header 'start_utc,end_utc,label'", lineno);
      }
      header = true;
      continue;
    }
    if (f.size() != 3) throw Error(Errc::malformed_line, "expected 3 columns", lineno);
    const auto a = parse_hms(f[0]);
    const auto b = parse_hms(f[1]);
    if (!a || !b || *b <= *a) throw Error(Errc::malformed_line, "bad block bounds", lineno);
    BlockLabel label;
    if (f[2] == "original") {
      label = BlockLabel::original;
    } else if (f[2] == "learned") {
      label = BlockLabel::learned;
    } else if (f[2] == "transition") {
      label = BlockLabel::transition;
    } else {
      throw Error(Errc::malformed_line, "unknown label '" + std::string(f[2]) + "'", lineno);
    }
    if (!s.empty() && *a < s.back().end_s) {
      throw Error(Errc::non_monotonic_time, "overlapping blocks", lineno);
    }
    s.push_back({*a, *b, label});
  }
  if (s.empty()) throw Error(Errc::malformed_line, "schedule has no blocks");
  return s;
}

struct AlternatingTable {
  TrackingTable table;
  Schedule schedule;
};

/// Realizes `plan` over the original table's span. Pointing blocks get a node
/// at each boundary; transitions get none, so the antenna's own interpolation
/// blends original and learned pointing linearly in time.
inline AlternatingTable generate_alternating(const TrackingTable& original, const Transform& t,
                                             const IntervalPlan& plan) {
  plan.validate();
  const int start = original.start_time();
  const int end = original.end_time();

  Schedule schedule;
  for (std::size_t i = 0; i < plan.labels.size(); ++i) {
    const int a = start + static_cast<int>(i) * plan.block_duration_s;
    if (a >= end) break;
    const int b = std::min(end, a + plan.block_duration_s);
    schedule.push_back({a, b, plan.labels[i]});
  }
  // A folded trailing transition leaves at most one block uncovered; the last
  // block absorbs it.
  if (schedule.back().end_s < end) {
    if (end - schedule.back().end_s > plan.block_duration_s) {
      throw Error(Errc::plan_invalid, "plan does not cover the original table");
    }
    schedule.back().end_s = end;
  }
  if (schedule.back().label == BlockLabel::transition) {
    throw Error(Errc::plan_invalid, "plan ends inside a transition");
  }

  std::vector<TrackPoint> nodes;
  auto node = [&](int time, BlockLabel label) {
    const Pointing p = original.interpolate(time);
    const Pointing q = label == BlockLabel::learned ? apply(t, p) : p;
    if (!nodes.empty() && nodes.back().time_s == time) return;  // shared boundary
    nodes.push_back({time, q});
  };
  std::size_t pointing_blocks = 0;
  for (const auto& e : schedule) {
    if (e.label == BlockLabel::transition) continue;
    ++pointing_blocks;
    node(e.start_s, e.label);
    node(e.end_s, e.label);
  }
  if (nodes.size() > TrackingTable::kMaxPoints) {
    throw Error(Errc::plan_overflow, std::to_string(pointing_blocks) + " pointing blocks need " +
                                         std::to_string(nodes.size()) + " track points (limit " +
                                         std::to_string(TrackingTable::kMaxPoints) + ")");
  }
  return {TrackingTable(std::move(nodes)), std::move(schedule)};
}

// ---------------------------------------------------------------------------
// Offset-cycle validation tables

struct OffsetCycleConfig {
  double radius_deg = 0.75;
  double step_deg = 45.0;
  int cycle_length = 17;
  int dwell_s = 60;
  int max_cycles = 0;  // 0: as many as fit

  static OffsetCycleConfig make(double radius_deg, double step_deg, int dwell_s = 60) {
    OffsetCycleConfig c;
    c.radius_deg = radius_deg;
    c.step_deg = step_deg;
    c.dwell_s = dwell_s;
    if (step_deg > 0.0) c.cycle_length = 2 * static_cast<int>(std::lround(360.0 / step_deg)) + 1;
    return c;
  }

  int directions() const { return static_cast<int>(std::lround(360.0 / step_deg)); }

  void validate() const {
    if (!(radius_deg > 0.0)) throw Error(Errc::invalid_argument, "offset radius must be positive");
    if (!(step_deg > 0.0) || step_deg > 360.0) {
      throw Error(Errc::invalid_argument, "offset step must be in (0, 360]");
    }
    const double n = 360.0 / step_deg;
    if (std::fabs(n - std::round(n)) > 1e-9) {
      throw Error(Errc::invalid_argument, "360 must be a multiple of the offset step");
    }
    if (cycle_length != 2 * directions() + 1) {
      throw Error(Errc::invalid_argument, "cycle length must equal 2 * (360 / step) + 1");
    }
    if (dwell_s <= 0) throw Error(Errc::invalid_argument, "dwell must be positive");
  }
};

/// (d_azimuth, d_elevation) for position `index` of a cycle. Even positions
/// carry no offset; odd position k points ((k - 1) / 2) * step degrees
/// counter-clockwise from the +elevation axis, with +azimuth a quarter turn
/// further round.
inline std::array<double, 2> cycle_offset(const OffsetCycleConfig& cfg, int index) {
  const int k = index % (cfg.cycle_length - 1);
  if (k % 2 == 0) return {0.0, 0.0};
  const double dir = deg2rad(((k - 1) / 2) * cfg.step_deg);
  return {cfg.radius_deg * std::sin(dir), cfg.radius_deg * std::cos(dir)};
}

/// Consecutive cycles share their zero-offset end point, so n cycles take
/// n * (cycle_length - 1) + 1 track points starting at the base table start.
inline TrackingTable generate_offset_cycle(const TrackingTable& base, const Transform& t,
                                           const OffsetCycleConfig& cfg) {
  cfg.validate();
  const int per_cycle = cfg.cycle_length - 1;
  if (static_cast<std::size_t>(cfg.cycle_length) > TrackingTable::kMaxPoints) {
    throw Error(Errc::plan_overflow, "one offset cycle exceeds the track point limit");
  }
  const int span = base.end_time() - base.start_time();
  const int fit_time = span / (per_cycle * cfg.dwell_s);
  const int fit_points = static_cast<int>(TrackingTable::kMaxPoints - 1) / per_cycle;
  int cycles = std::min(fit_time, fit_points);
  if (cfg.max_cycles > 0) {
    if (cfg.max_cycles > cycles) {
      throw Error(Errc::plan_overflow, std::to_string(cfg.max_cycles) + " offset cycles do not fit");
    }
    cycles = cfg.max_cycles;
  }
  if (cycles < 1) throw Error(Errc::plan_overflow, "no complete offset cycle fits the base table");

  std::vector<TrackPoint> points;
  for (int i = 0; i <= cycles * per_cycle; ++i) {
    const int time = base.start_time() + i * cfg.dwell_s;
    const Pointing learned = apply(t, base.interpolate(time));
    const auto off = cycle_offset(cfg, i);
    points.push_back(
        {time, Pointing(learned.azimuth_deg() + off[0], learned.elevation_deg() + off[1])});
  }
  return TrackingTable(std::move(points));
}

}  // namespace antcal

#endif  // ANTCAL_TRACKTAB_HPP
