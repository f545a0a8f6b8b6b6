#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "antcal/tracktab.hpp"

using namespace antcal;

namespace {

const char* kTableI =
    "07:18:21 114.67 0.00\n"
    "07:29:45 116.97 1.53\n"
    "07:41:09 119.28 3.03\n";

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;  // sentinel: nothing thrown
}

TrackingTable linear_table(int n, int dt) {
  std::vector<TrackPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back({3600 + i * dt, Pointing(100.0 + 0.5 * i, 0.3 * i)});
  return TrackingTable(pts);
}

}  // namespace

TEST(Parse, TableExcerpt) {
  const auto t = parse_tracking_table(kTableI);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.points()[0].time_s, 7 * 3600 + 18 * 60 + 21);
  EXPECT_EQ(t.points()[0].pointing.azimuth_deg(), 114.67);
  EXPECT_EQ(t.points()[0].pointing.elevation_deg(), 0.00);
  EXPECT_EQ(t.points()[1].pointing.azimuth_deg(), 116.97);
  EXPECT_EQ(t.points()[1].pointing.elevation_deg(), 1.53);
  EXPECT_EQ(t.points()[2].pointing.azimuth_deg(), 119.28);
  EXPECT_EQ(t.points()[2].pointing.elevation_deg(), 3.03);
}

TEST(Parse, CommentsAndBlanks) {
  const auto t = parse_tracking_table("# header\n\n07:18:21  114.67\t0.00\n  # x\n07:29:45 116.97 1.53\n");
  EXPECT_EQ(t.size(), 2u);
}

TEST(Parse, Errors) {
  EXPECT_EQ(code_of([] { parse_tracking_table("07:18:21 114.67 0.00\n07:18:21 115 1\n"); }),
            Errc::non_monotonic_time);
  EXPECT_EQ(code_of([] { parse_tracking_table("07:18:21 114.67\n"); }), Errc::malformed_line);
  EXPECT_EQ(code_of([] { parse_tracking_table("07:61:00 114.67 0\n07:62:00 1 1\n"); }),
            Errc::malformed_line);
  EXPECT_EQ(code_of([] { parse_tracking_table("07:00:00 114.67 95\n07:01:00 1 1\n"); }),
            Errc::out_of_range_angle);
  EXPECT_EQ(code_of([] { parse_tracking_table("07:00:00 1 1\n"); }), Errc::point_count);
  try {
    parse_tracking_table("07:00:00 1 1\nbogus line here\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Parse, PointLimit) {
  std::string text;
  for (int i = 0; i < 101; ++i) text += format_hms(3600 + i * 10) + " 120.00 10.00\n";
  EXPECT_EQ(code_of([&] { parse_tracking_table(text); }), Errc::point_count);
  const auto cut = text.substr(0, text.rfind(format_hms(3600 + 100 * 10)));
  EXPECT_EQ(parse_tracking_table(cut).size(), 100u);
}

TEST(Serialize, TableExcerptRoundTrip) {
  EXPECT_EQ(serialize(parse_tracking_table(kTableI)), kTableI);
}

TEST(Serialize, RoundsHalfUp) {
  const TrackingTable t({{0, Pointing(119.275, 3.025)}, {60, Pointing(0.004, 0.005)}});
  EXPECT_EQ(serialize(t), "00:00:00 119.28 3.03\n00:01:00 0.00 0.01\n");
  EXPECT_EQ(format_angle(359.996), "360.00");
  EXPECT_EQ(serialize(TrackingTable({{0, Pointing(359.996, 0)}, {1, Pointing(1, 0)}})).substr(9, 4),
            "0.00");
}

TEST(Serialize, EmptyRejected) {
  EXPECT_EQ(code_of([] { TrackingTable({}); }), Errc::point_count);
}

TEST(Serialize, HundredPointRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> az(0, 35999), el(-1000, 9000);
  std::vector<TrackPoint> pts;
  for (int i = 0; i < 100; ++i) {
    pts.push_back({i * 600, Pointing(az(rng) / 100.0, el(rng) / 100.0)});
  }
  const TrackingTable t(pts);
  const auto text = serialize(t);
  EXPECT_EQ(parse_tracking_table(text), t);
  EXPECT_EQ(serialize(parse_tracking_table(text)), text);
}

TEST(Interpolate, NodesAndMidpoint) {
  const auto t = parse_tracking_table(kTableI);
  for (const auto& p : t.points()) EXPECT_EQ(t.interpolate(p.time_s), p.pointing);
  const double mid = 0.5 * (t.points()[0].time_s + t.points()[1].time_s);
  EXPECT_NEAR(t.interpolate(mid).azimuth_deg(), 0.5 * (114.67 + 116.97), 1e-12);
  EXPECT_NEAR(t.interpolate(mid).azimuth_deg(), 115.82, 1e-12);
  EXPECT_EQ(code_of([&] { t.interpolate(t.start_time() - 1); }), Errc::out_of_range_time);
  EXPECT_EQ(code_of([&] { t.interpolate(t.end_time() + 0.5); }), Errc::out_of_range_time);
}

TEST(Interpolate, ExactOnLinearTrajectory) {
  const auto t = linear_table(20, 60);
  for (double s = t.start_time(); s <= t.end_time(); s += 0.25) {
    const double f = (s - 3600) / 60.0;
    EXPECT_NEAR(t.interpolate(s).azimuth_deg(), 100.0 + 0.5 * f, 1e-9);
    EXPECT_NEAR(t.interpolate(s).elevation_deg(), 0.3 * f, 1e-9);
  }
}

TEST(Interpolate, ShortWayThroughNorth) {
  const TrackingTable t({{0, Pointing(359.0, 5.0)}, {100, Pointing(1.0, 5.0)}});
  EXPECT_NEAR(t.interpolate(50).azimuth_deg(), 0.0, 1e-12);
  EXPECT_NEAR(t.interpolate(25).azimuth_deg(), 359.5, 1e-12);
}

TEST(Plan, AlternatingPattern) {
  const auto plan = IntervalPlan::alternating(600, 36000);
  ASSERT_EQ(plan.labels.size(), 59u);  // trailing transition folded away
  EXPECT_EQ(plan.labels[0], BlockLabel::original);
  EXPECT_EQ(plan.labels[1], BlockLabel::transition);
  EXPECT_EQ(plan.labels[2], BlockLabel::learned);
  EXPECT_EQ(plan.labels[3], BlockLabel::transition);
  EXPECT_NO_THROW(plan.validate());
  IntervalPlan bad{600, {BlockLabel::original, BlockLabel::learned}};
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::plan_invalid);
  bad.labels = {BlockLabel::transition, BlockLabel::original};
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::plan_invalid);
  bad.labels = {BlockLabel::original, BlockLabel::transition, BlockLabel::original};
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::plan_invalid);
}

TEST(Alternating, IdentityEqualsResampledOriginal) {
  const auto orig = linear_table(50, 720);  // 9.8 h
  const auto plan = IntervalPlan::alternating(600, orig.end_time() - orig.start_time());
  const auto alt = generate_alternating(orig, Transform{}, plan);
  for (const auto& p : alt.table.points()) {
    const auto q = orig.interpolate(p.time_s);
    EXPECT_NEAR(p.pointing.azimuth_deg(), q.azimuth_deg(), 1e-12);
    EXPECT_NEAR(p.pointing.elevation_deg(), q.elevation_deg(), 1e-12);
  }
  for (double s = orig.start_time(); s <= orig.end_time(); s += 37) {
    EXPECT_NEAR(alt.table.interpolate(s).azimuth_deg(), orig.interpolate(s).azimuth_deg(), 1e-9);
  }
}

TEST(Alternating, NodesAndSchedule) {
  const auto orig = linear_table(50, 720);
  const auto t = Transform::rotation(0.5, 0.1, -0.1);
  const auto plan = IntervalPlan::alternating(600, orig.end_time() - orig.start_time());
  const auto alt = generate_alternating(orig, t, plan);
  const auto blocks = count_label(alt.schedule, BlockLabel::original) +
                      count_label(alt.schedule, BlockLabel::learned);
  EXPECT_EQ(alt.table.size(), 2 * blocks);
  EXPECT_LE(alt.table.size(), 100u);
  EXPECT_EQ(alt.schedule.front().start_s, orig.start_time());
  EXPECT_EQ(alt.schedule.back().end_s, orig.end_time());
  for (std::size_t i = 1; i < alt.schedule.size(); ++i) {
    EXPECT_EQ(alt.schedule[i].start_s, alt.schedule[i - 1].end_s);
  }
  for (const auto& e : alt.schedule) {
    if (e.label == BlockLabel::transition) {
      for (const auto& p : alt.table.points()) {
        EXPECT_FALSE(p.time_s > e.start_s && p.time_s < e.end_s);
      }
      continue;
    }
    const auto want = e.label == BlockLabel::learned ? apply(t, orig.interpolate(e.start_s))
                                                     : orig.interpolate(e.start_s);
    const auto got = alt.table.interpolate(e.start_s);
    EXPECT_NEAR(got.azimuth_deg(), want.azimuth_deg(), 1e-12);
    EXPECT_NEAR(got.elevation_deg(), want.elevation_deg(), 1e-12);
  }
  // transition midpoints blend the two sides
  const auto& tr = alt.schedule[1];
  const double mid = 0.5 * (tr.start_s + tr.end_s);
  const auto a = alt.table.interpolate(tr.start_s);
  const auto b = alt.table.interpolate(tr.end_s);
  EXPECT_NEAR(alt.table.interpolate(mid).azimuth_deg(), 0.5 * (a.azimuth_deg() + b.azimuth_deg()),
              1e-9);
}

TEST(Alternating, SixMinuteBlocks) {
  // four hours of 6 min blocks: 40 blocks, 20 pointing blocks, 40 nodes
  const auto orig = linear_table(41, 360);
  const auto alt = generate_alternating(orig, Transform{}, IntervalPlan::alternating(360, 14400));
  EXPECT_EQ(alt.table.size(), 2 * (count_label(alt.schedule, BlockLabel::original) +
                                   count_label(alt.schedule, BlockLabel::learned)));
  EXPECT_LE(alt.table.size(), 100u);
}

TEST(Alternating, LongDayNeedsLongerBlocks) {
  // 14 h: 6 min blocks give 140 blocks, 70 pointing blocks, 140 nodes
  const auto orig = linear_table(99, 509);
  const int span = orig.end_time() - orig.start_time();
  EXPECT_EQ(code_of([&] { generate_alternating(orig, Transform{}, IntervalPlan::alternating(360, span)); }),
            Errc::plan_overflow);
  const auto ok = generate_alternating(orig, Transform{}, IntervalPlan::alternating(600, span));
  EXPECT_LE(ok.table.size(), 100u);
}

TEST(Schedule, RoundTrip) {
  const auto orig = linear_table(50, 720);
  const auto alt = generate_alternating(orig, Transform{}, IntervalPlan::alternating(600, 49 * 720));
  const auto text = serialize_schedule(alt.schedule);
  EXPECT_EQ(text.substr(0, 24), "start_utc,end_utc,label\n");
  EXPECT_EQ(parse_schedule(text), alt.schedule);
  EXPECT_EQ(block_duration(alt.schedule), 600.0);
  EXPECT_EQ(label_at(alt.schedule, alt.schedule[1].start_s + 1), BlockLabel::transition);
  EXPECT_FALSE(label_at(alt.schedule, 0.0).has_value());
  EXPECT_EQ(code_of([] { parse_schedule("start_utc,end_utc,label\n01:00:00,01:10:00,other\n"); }),
            Errc::malformed_line);
  EXPECT_EQ(code_of([] { parse_schedule("a,b,c\n"); }), Errc::malformed_line);
}

TEST(OffsetCycle, Offsets) {
  const auto cfg = OffsetCycleConfig::make(0.75, 45.0);
  EXPECT_EQ(cfg.cycle_length, 17);
  const auto o0 = cycle_offset(cfg, 0);
  EXPECT_EQ(o0[0], 0.0);
  EXPECT_EQ(o0[1], 0.0);
  const auto o1 = cycle_offset(cfg, 1);
  EXPECT_NEAR(o1[0], 0.0, 1e-15);
  EXPECT_NEAR(o1[1], 0.75, 1e-15);
  const auto o3 = cycle_offset(cfg, 3);
  EXPECT_NEAR(o3[0], 0.75 * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(o3[1], 0.75 * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(o3[0], 0.5303, 1e-4);
}

TEST(OffsetCycle, CycleProperties) {
  const auto cfg = OffsetCycleConfig::make(0.75, 45.0);
  double sa = 0, se = 0;
  for (int k = 0; k < cfg.cycle_length - 1; ++k) {
    const auto o = cycle_offset(cfg, k);
    sa += o[0];
    se += o[1];
    if (k % 2 == 1) {
      EXPECT_NEAR(std::hypot(o[0], o[1]), 0.75, 1e-12);
      const auto prev = cycle_offset(cfg, k - 2 < 0 ? 15 : k - 2);
      const double cosang = (o[0] * prev[0] + o[1] * prev[1]) / (0.75 * 0.75);
      EXPECT_NEAR(cosang, std::cos(45.0 * std::numbers::pi / 180.0), 1e-12);
    }
  }
  EXPECT_NEAR(sa, 0.0, 1e-12);
  EXPECT_NEAR(se, 0.0, 1e-12);
}

TEST(OffsetCycle, Table) {
  const auto base = linear_table(30, 600);
  const auto t = Transform::rotation(0.2, 0.03, -0.02);
  auto cfg = OffsetCycleConfig::make(0.75, 45.0, 60);
  cfg.max_cycles = 1;
  const auto one = generate_offset_cycle(base, t, cfg);
  EXPECT_EQ(one.size(), 17u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    const auto& p = one.points()[i];
    const auto learned = apply(t, base.interpolate(p.time_s));
    const double da = p.pointing.azimuth_deg() - learned.azimuth_deg();
    const double de = p.pointing.elevation_deg() - learned.elevation_deg();
    if (i % 2 == 0) {
      EXPECT_NEAR(std::hypot(da, de), 0.0, 1e-12);
    } else {
      EXPECT_NEAR(std::hypot(da, de), 0.75, 1e-12);
    }
  }
  cfg.max_cycles = 0;
  const auto many = generate_offset_cycle(base, t, cfg);
  EXPECT_EQ((many.size() - 1) % 16, 0u);
  EXPECT_LE(many.size(), 100u);
  cfg.max_cycles = 7;
  EXPECT_EQ(code_of([&] { generate_offset_cycle(base, t, cfg); }), Errc::plan_overflow);
}

TEST(OffsetCycle, ConfigValidation) {
  EXPECT_EQ(code_of([] { OffsetCycleConfig::make(0.0, 45.0).validate(); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { OffsetCycleConfig::make(0.75, 50.0).validate(); }), Errc::invalid_argument);
  auto c = OffsetCycleConfig::make(0.75, 45.0);
  c.cycle_length = 16;
  EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
  EXPECT_EQ(OffsetCycleConfig::make(0.5, 90.0).cycle_length, 9);
}
