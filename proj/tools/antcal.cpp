// antcal: batch front end for the pointing-calibration pipeline.
//
//   antcal simulate  SCENARIO [TABLE]               -> log.csv truth.csv trajectory.tab
//   antcal gen-table ORIGINAL TRANSFORM             -> table.tab [schedule.csv]
//   antcal extract   LOG SCHEDULE ORIGINAL COMMANDED -> pairs.csv diagnostics.csv
//   antcal fit       PAIRS                          -> transform.txt report.txt
//   antcal evaluate  TRANSFORM PAIRS
//   antcal decompose TRANSFORM
//
// Exit codes: 0 success, 2 input or validation error, 3 empty result.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "antcal/antcal.hpp"

namespace fs = std::filesystem;
using namespace antcal;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEmpty = 3;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << content;
  if (!out) throw Error(Errc::io, "write failed for " + p.string());
  spdlog::info("wrote {}", p.string());
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory " + dir + ": " + ec.message());
  return p;
}

template <typename F>
auto with_file(const std::string& path, F&& parse) {
  try {
    return parse(read_text(path));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("antcal");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ANTCAL_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

std::string fit_report(const FitReport& r, std::size_t n) {
  std::string out = format_training_error(r);
  out += "pairs " + std::to_string(n) + "\n";
  if (!r.flagged.empty()) {
    out += "flagged";
    for (auto i : r.flagged) out += " " + std::to_string(i);
    out += "\n";
  }
  return out;
}

struct Options {
  // simulate
  std::string scenario, table;
  std::optional<std::uint64_t> seed;
  // gen-table
  std::string original, transform;
  int block_minutes = 10;
  bool offset_cycle = false;
  double radius = 0.75, alpha = 45.0;
  int dwell = 60, cycles = 0;
  // extract
  std::string log, schedule, commanded;
  std::optional<double> sigma, bandwidth, merge_bandwidth, hb_step, hb_momentum;
  // fit / evaluate
  std::string pairs;
  std::string out = ".";
};

int cmd_simulate(const Options& o) {
  const fs::path scenario_path(o.scenario);
  Scenario sc = with_file(o.scenario, [&](const std::string& s) {
    return parse_scenario(s, scenario_path.parent_path());
  });
  if (o.seed) sc.rng_seed = *o.seed;
  const TrackingTable table =
      o.table.empty() ? sc.trajectory : with_file(o.table, [](const std::string& s) {
        return parse_tracking_table(s);
      });
  const auto sim = simulate(sc, table);
  const auto dir = prepare_out(o.out);
  write_text(dir / "log.csv", write_log(sim.series));
  write_text(dir / "truth.csv", write_truth(sim));
  write_text(dir / "trajectory.tab", serialize(sc.trajectory));
  std::cout << "samples " << sim.series.size() << "\n";
  return 0;
}

int cmd_gen_table(const Options& o) {
  const auto original = with_file(o.original, [](const std::string& s) { return parse_tracking_table(s); });
  const auto t = with_file(o.transform, [](const std::string& s) { return parse_transform(s); });
  const auto dir = prepare_out(o.out);
  if (o.offset_cycle) {
    auto cfg = OffsetCycleConfig::make(o.radius, o.alpha, o.dwell);
    cfg.max_cycles = o.cycles;
    const auto table = generate_offset_cycle(original, t, cfg);
    write_text(dir / "table.tab", serialize(table));
    std::cout << "points " << table.size() << " cycle_length " << cfg.cycle_length << "\n";
    return 0;
  }
  if (o.block_minutes <= 0) throw Error(Errc::invalid_argument, "--block-minutes must be positive");
  const auto plan = IntervalPlan::alternating(o.block_minutes * 60,
                                              original.end_time() - original.start_time());
  const auto alt = generate_alternating(original, t, plan);
  write_text(dir / "table.tab", serialize(alt.table));
  write_text(dir / "schedule.csv", serialize_schedule(alt.schedule));
  std::cout << "points " << alt.table.size() << " blocks " << alt.schedule.size() << "\n";
  return 0;
}

int cmd_extract(const Options& o) {
  const auto log = with_file(o.log, [](const std::string& s) { return ingest_log(s); });
  const auto schedule = with_file(o.schedule, [](const std::string& s) { return parse_schedule(s); });
  const auto original = with_file(o.original, [](const std::string& s) { return parse_tracking_table(s); });
  const auto commanded = with_file(o.commanded, [](const std::string& s) { return parse_tracking_table(s); });

  auto cfg = MaximaConfig::for_block_duration(block_duration(schedule));
  if (o.sigma) cfg.smoothing.sigma_seconds = *o.sigma;
  if (o.bandwidth) cfg.meanshift_bandwidth = *o.bandwidth;
  if (o.merge_bandwidth) cfg.merge_bandwidth = *o.merge_bandwidth;
  if (o.hb_step) cfg.hb_step = *o.hb_step;
  if (o.hb_momentum) cfg.hb_momentum = *o.hb_momentum;

  const auto ex = extract_training_set(log, schedule, original, commanded, cfg);
  for (const auto& p : ex.dropped) {
    spdlog::warn("dropped pair at {}: offset exceeds {} deg",
                 format_iso8601(log.date(), micros_from_seconds(p.time_s.value_or(0.0))),
                 cfg.sanity_bound_deg);
  }
  const auto dir = prepare_out(o.out);
  write_text(dir / "pairs.csv", write_pairs(ex.pairs, log.date()));
  write_text(dir / "diagnostics.csv", write_diagnostics(ex.diagnostics, log.date()));
  const auto& d = ex.diagnostics;
  std::cout << "preliminary " << d.preliminary.size() << "\nclustered " << d.clustered.size()
            << "\nrefined " << d.refined.size() << "\nmerged " << d.merged.size() << "\nfinal "
            << d.final.size() << "\npairs " << ex.pairs.size() << "\ndropped " << ex.dropped.size()
            << "\n";
  if (ex.pairs.empty()) {
    spdlog::error("every detected maximum failed the sanity bound");
    return kExitEmpty;
  }
  return 0;
}

int cmd_fit(const Options& o) {
  const TrainingSet ts(with_file(o.pairs, [](const std::string& s) { return parse_pairs(s); }));
  const auto r = fit(ts);
  spdlog::info("gram condition number {:.3e}{}", r.condition_number,
               r.used_qr ? " (QR fallback)" : "");
  const auto dir = prepare_out(o.out);
  const auto report = fit_report(r, ts.size());
  write_text(dir / "transform.txt", write_transform(r.transform));
  write_text(dir / "report.txt", report);
  std::cout << report;
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto t = with_file(o.transform, [](const std::string& s) { return parse_transform(s); });
  const TrainingSet ts(with_file(o.pairs, [](const std::string& s) { return parse_pairs(s); }));
  std::cout << fit_report(evaluate(t, ts), ts.size());
  return 0;
}

int cmd_decompose(const Options& o) {
  const auto t = with_file(o.transform, [](const std::string& s) { return parse_transform(s); });
  const auto d = decompose(t);
  std::cout << "translation " << text::fixed(d.translation(0), 6) << " "
            << text::fixed(d.translation(1), 6) << "\n"
            << "scaling " << text::fixed(d.scaling(0), 6) << " " << text::fixed(d.scaling(1), 6)
            << "\n"
            << "shear " << text::fixed(d.shear, 6) << "\n"
            << "rotation_deg " << text::fixed(d.rotation_deg, 6) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  Options o;
  CLI::App app{"Antenna pointing calibration from operational signal levels"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Synthesize a monitoring log from a scenario");
  sim->add_option("scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("table", o.table, "Commanded tracking table (default: the trajectory)")
      ->check(CLI::ExistingFile);
  sim->add_option("--seed", o.seed, "Override the scenario rng_seed");
  sim->add_option("--out", o.out, "Output directory");

  auto* gen = app.add_subcommand("gen-table", "Build an alternating or offset-cycle tracking table");
  gen->add_option("original", o.original, "Original tracking table")->required()->check(CLI::ExistingFile);
  gen->add_option("transform", o.transform, "Transform file")->required()->check(CLI::ExistingFile);
  gen->add_option("--block-minutes", o.block_minutes, "Block length of the alternating plan");
  gen->add_flag("--offset-cycle", o.offset_cycle, "Emit an offset-cycle validation table");
  gen->add_option("--radius", o.radius, "Offset radius in degrees");
  gen->add_option("--alpha", o.alpha, "Offset direction step in degrees");
  gen->add_option("--dwell", o.dwell, "Seconds between offset-cycle points");
  gen->add_option("--cycles", o.cycles, "Number of offset cycles (0: as many as fit)");
  gen->add_option("--out", o.out, "Output directory");

  auto* ext = app.add_subcommand("extract", "Detect level maxima and emit training pairs");
  ext->add_option("log", o.log, "Signal log CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("schedule", o.schedule, "Schedule sidecar CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("original", o.original, "Original tracking table")->required()->check(CLI::ExistingFile);
  ext->add_option("commanded", o.commanded, "Commanded tracking table")->required()->check(CLI::ExistingFile);
  ext->add_option("--sigma", o.sigma, "Smoothing sigma in seconds");
  ext->add_option("--bandwidth", o.bandwidth, "Mean-shift bandwidth in seconds");
  ext->add_option("--merge-bandwidth", o.merge_bandwidth, "Second merge bandwidth in seconds");
  ext->add_option("--hb-step", o.hb_step, "Heavy-ball step size (s^2/dBm)");
  ext->add_option("--hb-momentum", o.hb_momentum, "Heavy-ball momentum in [0, 1)");
  ext->add_option("--out", o.out, "Output directory");

  auto* fitc = app.add_subcommand("fit", "Fit the correction transform to training pairs");
  fitc->add_option("pairs", o.pairs, "Training pairs CSV")->required()->check(CLI::ExistingFile);
  fitc->add_option("--out", o.out, "Output directory");

  auto* eval = app.add_subcommand("evaluate", "Training error of a fixed transform");
  eval->add_option("transform", o.transform, "Transform file")->required()->check(CLI::ExistingFile);
  eval->add_option("pairs", o.pairs, "Training pairs CSV")->required()->check(CLI::ExistingFile);

  auto* dec = app.add_subcommand("decompose", "Print translation, scaling, shear and rotation");
  dec->add_option("transform", o.transform, "Transform file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*gen) return cmd_gen_table(o);
    if (*ext) return cmd_extract(o);
    if (*fitc) return cmd_fit(o);
    if (*eval) return cmd_evaluate(o);
    if (*dec) return cmd_decompose(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == Errc::no_maxima_found ? kExitEmpty : kExitInput;
  }
  return kExitInput;
}
