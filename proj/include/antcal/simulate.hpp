#ifndef ANTCAL_SIMULATE_HPP
#define ANTCAL_SIMULATE_HPP

// Ground-truth simulator. A satellite follows a nominal trajectory; the
// antenna receives best when commanded to t_true applied to that trajectory.
// The received level follows a parabolic main-lobe law in the angular offset
// between commanded and optimal pointing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "antcal/error.hpp"
#include "antcal/geometry.hpp"
#include "antcal/signalio.hpp"
#include "antcal/text.hpp"
#include "antcal/time.hpp"
#include "antcal/tracktab.hpp"

namespace antcal {

/// Attenuation applied while the satellite direction lies inside
/// [az_min, az_max] and below `elevation_ceiling_deg`.
struct Obstacle {
  double az_min_deg = 0.0;
  double az_max_deg = 0.0;
  double elevation_ceiling_deg = 0.0;
  double attenuation_db = 0.0;

  bool blocks(const Pointing& p) const {
    const double az = p.azimuth_deg();
    const bool in_az = az_min_deg <= az_max_deg ? (az >= az_min_deg && az <= az_max_deg)
                                                : (az >= az_min_deg || az <= az_max_deg);
    return in_az && p.elevation_deg() < elevation_ceiling_deg;
  }
};

/// Smooth sun-like day arc: azimuth rises monotonically from 115 through
/// south to 245 degrees, fastest around noon; elevation follows a half sine
/// from 0 up to `peak_elevation_deg` and back. An odd point count puts a node
/// exactly at the midpoint.
inline TrackingTable make_dscovr_like_trajectory(int sunrise_s, int sunset_s,
                                                 double peak_elevation_deg,
                                                 std::size_t points = 99) {
  if (sunrise_s < 0 || sunset_s >= kSecondsPerDay || sunrise_s >= sunset_s) {
    throw Error(Errc::invalid_window, "sunrise must precede sunset within one day");
  }
  if (!(peak_elevation_deg > 0.0 && peak_elevation_deg < 90.0)) {
    throw Error(Errc::invalid_window, "peak elevation must be in (0, 90)");
  }
  const int span = sunset_s - sunrise_s;
  points = std::min<std::size_t>(points, std::min<std::size_t>(TrackingTable::kMaxPoints,
                                                               static_cast<std::size_t>(span) + 1));
  if (points < 2) throw Error(Errc::invalid_window, "need at least 2 trajectory points");
  constexpr double kRiseAz = 115.0;
  constexpr double kSweep = 130.0;
  std::vector<TrackPoint> out;
  for (std::size_t i = 0; i < points; ++i) {
    const int t = sunrise_s + static_cast<int>(std::lround(static_cast<double>(i) * span /
                                                           static_cast<double>(points - 1)));
    const double f = static_cast<double>(t - sunrise_s) / span;
    const double az = kRiseAz + kSweep * (f - 0.3 * std::sin(2.0 * std::numbers::pi * f) /
                                                  (2.0 * std::numbers::pi));
    double el = peak_elevation_deg * std::sin(std::numbers::pi * f);
    if (std::fabs(el) < 1e-9) el = 0.0;
    out.push_back({t, Pointing(az, el)});
  }
  return TrackingTable(std::move(out));
}

struct Scenario {
  TrackingTable trajectory = make_dscovr_like_trajectory(7 * 3600, 17 * 3600, 60.0);
  Transform t_true;
  double hpbw_deg = 1.5;
  double peak_dbm = -33.0;
  double noise_sigma_dbm = 0.1;
  double sample_rate = 1.0;  // Hz
  std::uint64_t rng_seed = 42;
  std::vector<Obstacle> obstacles;
  std::chrono::sys_days date = std::chrono::sys_days{std::chrono::year{2022} / 6 / 21};

  void validate() const {
    if (!(hpbw_deg > 0.0)) throw Error(Errc::invalid_argument, "hpbw_deg must be positive");
    if (!(sample_rate > 0.0)) throw Error(Errc::invalid_argument, "sample_rate must be positive");
    if (!(noise_sigma_dbm >= 0.0)) {
      throw Error(Errc::invalid_argument, "noise_sigma_dbm must be non-negative");
    }
    if (trajectory.end_time() - trajectory.start_time() < 3600) {
      throw Error(Errc::invalid_argument, "trajectory must span at least one hour");
    }
  }
};

/// Main-lobe level at angular offset `offset_deg`: -3 dB at half the HPBW.
inline double beam_level(double peak_dbm, double hpbw_deg, double offset_deg) {
  const double x = offset_deg / hpbw_deg;
  return peak_dbm - 12.0 * x * x;
}

struct SimOutput {
  SignalSeries series;  // level plus commanded pointing per sample
  TrackingTable commanded;
  std::vector<Pointing> truth;  // optimal pointing per sample
};

/// Samples the received level on a regular grid over the commanded table.
/// Output is a pure function of the scenario (including its seed).
inline SimOutput simulate(const Scenario& sc, const TrackingTable& table) {
  sc.validate();
  if (table.start_time() < sc.trajectory.start_time() ||
      table.end_time() > sc.trajectory.end_time()) {
    throw Error(Errc::span_mismatch, "commanded table leaves the trajectory span");
  }
  std::mt19937_64 rng(sc.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::int64_t start_us = static_cast<std::int64_t>(table.start_time()) * 1'000'000;
  const std::int64_t end_us = static_cast<std::int64_t>(table.end_time()) * 1'000'000;
  std::vector<SignalSample> samples;
  std::vector<Pointing> truth;
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t us = start_us + std::llround(static_cast<double>(k) * 1e6 / sc.sample_rate);
    if (us > end_us) break;
    const double t = seconds_from_micros(us);
    const Pointing nominal = sc.trajectory.interpolate(t);
    const Pointing optimal = apply(sc.t_true, nominal);
    const Pointing cmd = table.interpolate(t);
    double level = beam_level(sc.peak_dbm, sc.hpbw_deg, angular_distance(cmd, optimal));
    for (const auto& o : sc.obstacles) {
      if (o.blocks(nominal)) level -= o.attenuation_db;
    }
    const double n = noise(rng);
    if (sc.noise_sigma_dbm > 0.0) level += sc.noise_sigma_dbm * n;
    samples.push_back({t, level, cmd});
    truth.push_back(optimal);
  }
  return {SignalSeries(std::move(samples), sc.sample_rate, sc.date), table, std::move(truth)};
}

/// CSV of the optimal pointing per sample: time_utc,azimuth_deg,elevation_deg
inline std::string write_truth(const SimOutput& out) {
  std::string s = "time_utc,azimuth_deg,elevation_deg\n";
  const auto& x = out.series.samples();
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += format_iso8601(out.series.date(), micros_from_seconds(x[i].time_s)) + "," +
         text::shortest(out.truth[i].azimuth_deg()) + "," +
         text::shortest(out.truth[i].elevation_deg()) + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Scenario file: `key = value` lines, '#' comments. Keys:
//   trajectory       dscovr HH:MM:SS HH:MM:SS PEAK_EL | path to a tracking table
//   t_true           rotation DEG [SHIFT_AZ SHIFT_EL] | 6 or 9 matrix entries
//   hpbw_deg, peak_dbm, noise_sigma_dbm, sample_rate, rng_seed
//   obstacles        AZ_MIN AZ_MAX EL_CEILING ATTEN_DB [; ...]
//   date             YYYY-MM-DD (timestamp date of the emitted log)

namespace detail {

inline std::vector<double> numbers(std::span<const std::string_view> f, std::size_t line) {
  std::vector<double> v;
  for (auto s : f) {
    const auto d = text::to_double(s);
    if (!d) throw Error(Errc::malformed_line, "bad number '" + std::string(s) + "'", line);
    v.push_back(*d);
  }
  return v;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Relative trajectory paths resolve against `base_dir`.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
  Scenario sc;
  const auto lines = text::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::is_blank_or_comment(lines[i])) continue;
    const auto line = text::trim(lines[i]);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::malformed_line, "expected key = value", lineno);
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    const auto f = text::split_ws(value);
    auto scalar = [&]() {
      const auto d = text::to_double(value);
      if (!d) throw Error(Errc::malformed_line, "bad value for " + std::string(key), lineno);
      return *d;
    };
    if (key == "trajectory") {
      if (!f.empty() && f[0] == "dscovr") {
        if (f.size() != 4) {
          throw Error(Errc::malformed_line, "trajectory = dscovr SUNRISE SUNSET PEAK_EL", lineno);
        }
        const auto a = parse_hms(f[1]);
        const auto b = parse_hms(f[2]);
        const auto peak = text::to_double(f[3]);
        if (!a || !b || !peak) throw Error(Errc::malformed_line, "bad dscovr trajectory", lineno);
        sc.trajectory = make_dscovr_like_trajectory(*a, *b, *peak);
      } else {
        std::filesystem::path p{std::string(value)};
        if (p.is_relative()) p = base_dir / p;
        sc.trajectory = parse_tracking_table(detail::read_file(p));
      }
    } else if (key == "t_true") {
      if (!f.empty() && f[0] == "rotation") {
        const auto v = detail::numbers(std::span(f).subspan(1), lineno);
        if (v.size() != 1 && v.size() != 3) {
          throw Error(Errc::malformed_line, "t_true = rotation DEG [SHIFT_AZ SHIFT_EL]", lineno);
        }
        sc.t_true = Transform::rotation(v[0], v.size() == 3 ? v[1] : 0.0, v.size() == 3 ? v[2] : 0.0);
      } else {
        const auto v = detail::numbers(f, lineno);
        if (v.size() != 6 && v.size() != 9) {
          throw Error(Errc::malformed_line, "t_true needs 6 or 9 entries", lineno);
        }
        if (v.size() == 9 && (v[6] != 0.0 || v[7] != 0.0 || v[8] != 1.0)) {
          throw Error(Errc::malformed_line, "t_true third row must be 0 0 1", lineno);
        }
        sc.t_true = Transform::from_rows(v[0], v[1], v[2], v[3], v[4], v[5]);
      }
    } else if (key == "hpbw_deg") {
      sc.hpbw_deg = scalar();
    } else if (key == "peak_dbm") {
      sc.peak_dbm = scalar();
    } else if (key == "noise_sigma_dbm") {
      sc.noise_sigma_dbm = scalar();
    } else if (key == "sample_rate") {
      sc.sample_rate = scalar();
    } else if (key == "rng_seed") {
      const auto s = text::to_int<std::uint64_t>(value);
      if (!s) throw Error(Errc::malformed_line, "bad rng_seed", lineno);
      sc.rng_seed = *s;
    } else if (key == "obstacles") {
      sc.obstacles.clear();
      for (auto part : text::split(value, ';')) {
        if (part.empty()) continue;
        const auto v = detail::numbers(text::split_ws(part), lineno);
        if (v.size() != 4) {
          throw Error(Errc::malformed_line, "obstacle needs AZ_MIN AZ_MAX EL_CEILING ATTEN_DB", lineno);
        }
        sc.obstacles.push_back({v[0], v[1], v[2], v[3]});
      }
    } else if (key == "date") {
      const auto d = parse_date(value);
      if (!d) throw Error(Errc::malformed_line, "bad date", lineno);
      sc.date = *d;
    } else {
      throw Error(Errc::malformed_line, "unknown key '" + std::string(key) + "'", lineno);
    }
  }
  sc.validate();
  return sc;
}

}  // namespace antcal

#endif  // ANTCAL_SIMULATE_HPP
