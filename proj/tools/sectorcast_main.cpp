// Command-line front end over the library: ingestion, preparation, curve
// inspection, training, validation, prediction, serving, scenario generation,
// plotting, and raw-collection pruning. Every subcommand works against a data
// root passed via --root or the SECTOR_CONGEST_ROOT environment variable.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "sectorcast/curve_filter.hpp"
#include "sectorcast/http_server.hpp"
#include "sectorcast/model_store.hpp"
#include "sectorcast/pi_store.hpp"
#include "sectorcast/plots.hpp"
#include "sectorcast/prep.hpp"
#include "sectorcast/raw_store.hpp"
#include "sectorcast/serving.hpp"
#include "sectorcast/synth.hpp"
#include "sectorcast/training.hpp"
#include "sectorcast/weather.hpp"

namespace {

using namespace sectorcast;

std::filesystem::path require_root(const std::string& root) {
  if (root.empty()) {
    throw std::runtime_error("data root not set: pass --root or set SECTOR_CONGEST_ROOT");
  }
  return root;
}

std::vector<std::string> read_lines(const std::string& input) {
  std::vector<std::string> lines;
  std::string line;
  if (input == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + input);
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

int cmd_ingest(const std::string& root, const std::string& day_str, const std::string& input) {
  UtcDate day = require_date(day_str);
  RawStore raw(require_root(root));
  IngestReport report = raw.ingest_day(read_lines(input), day);
  std::printf("ingested %s: accepted %llu, rejected %llu, %llu bytes\n",
              format_date(day).c_str(), static_cast<unsigned long long>(report.accepted),
              static_cast<unsigned long long>(report.rejected),
              static_cast<unsigned long long>(report.bytes_stored));
  for (std::size_t i = 0; i < report.rejections.size() && i < 5; ++i) {
    std::fprintf(stderr, "  rejected line %zu: %s\n", report.rejections[i].line_number,
                 report.rejections[i].reason.c_str());
  }
  if (report.rejections.size() > 5) {
    std::fprintf(stderr, "  ... %zu more rejections\n", report.rejections.size() - 5);
  }
  return 0;
}

int cmd_prepare(const std::string& root, const std::string& day_str) {
  UtcDate day = require_date(day_str);
  std::filesystem::path data_root = require_root(root);
  RawStore raw(data_root);
  PrepReport report = run_preparation(raw, data_root, day);
  std::printf("prepared %s: %ld flights, %ld documents, %ld correlated, %ld sectors\n",
              format_date(day).c_str(), report.flights_seen, report.documents_built,
              report.documents_correlated, report.sectors_counted);
  const char* step_names[5] = {"indices", "scan", "populate", "correlate", "reduce"};
  for (int i = 0; i < 5; ++i) {
    std::printf("  step %d (%s): %.3fs\n", i + 1, step_names[i], report.step_seconds[i]);
  }
  for (const PrepFailure& f : report.failures) {
    std::fprintf(stderr, "  flight %s skipped: %s\n", f.flight_ref.c_str(), f.reason.c_str());
  }
  return 0;
}

int cmd_filter(const std::string& root, const std::string& sector, const std::string& weekday_str) {
  std::optional<Weekday> wd = weekday_from_name(weekday_str);
  if (!wd) throw std::runtime_error("unknown weekday: " + weekday_str + " (use Mon..Sun)");
  PiStore pi(require_root(root));
  std::vector<DailyCurve> curves;
  for (UtcDate day : pi.days()) {
    if (weekday_of(day) != *wd) continue;
    std::map<std::string, SectorCountSeries> counts = pi.read_dms_b(day);
    auto it = counts.find(sector);
    if (it != counts.end()) {
      curves.push_back(DailyCurve::from_series(it->second));
    } else {
      SectorCountSeries empty;
      empty.sector = sector;
      empty.day = day;
      curves.push_back(DailyCurve::from_series(empty));
    }
  }
  if (curves.size() < 2) {
    std::fprintf(stderr, "need at least 2 %s curves for %s, have %zu\n", weekday_name(*wd),
                 sector.c_str(), curves.size());
    return 1;
  }
  RejectionResult r = reject_outliers(curves);
  std::printf("%s on %s: %zu curves, trend %.4f per day + %.4f, threshold %.4f\n", sector.c_str(),
              weekday_name(*wd), curves.size(), r.trend.slope, r.trend.intercept, r.threshold);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::printf("  %s  score %.4f  %s\n", format_date(curves[i].day).c_str(), r.scores[i],
                r.rejected.count(i) ? "rejected" : "accepted");
  }
  return 0;
}

TrainingConfig build_config(bool with_uncertainty, int learners, double shrinkage) {
  TrainingConfig cfg;
  cfg.schema.with_uncertainty = with_uncertainty;
  cfg.boost.n_learners = learners;
  cfg.boost.shrinkage = shrinkage;
  cfg.created_at = static_cast<Timestamp>(std::time(nullptr));
  return cfg;
}

int cmd_train(const std::string& root, const std::string& from_str, const std::string& to_str,
              bool with_uncertainty, int learners, double shrinkage) {
  std::filesystem::path data_root = require_root(root);
  PiStore pi(data_root);
  ModelStore store(data_root);
  WeatherTable wx = WeatherTable::load_dir(data_root / "wx");
  TrainingConfig cfg = build_config(with_uncertainty, learners, shrinkage);
  TrainingReport report =
      train_all_sectors(pi, store, require_date(from_str), require_date(to_str), cfg, wx);
  int failures = 0;
  for (const SectorTrainingOutcome& s : report.sectors) {
    if (s.ok()) {
      std::printf("%s: model %d, curves %d/%d, %zu samples, %.2fs\n", s.sector.c_str(), s.model_id,
                  s.curves_accepted, s.curves_total, s.sample_count, s.duration_s);
    } else {
      std::fprintf(stderr, "%s: failed: %s\n", s.sector.c_str(), s.error.c_str());
      ++failures;
    }
  }
  std::printf("trained %zu sectors in %.2fs total\n", report.sectors.size() - failures,
              report.total_duration_s);
  return failures == 0 ? 0 : 1;
}

int cmd_validate(const std::string& root, const std::string& from_str, const std::string& to_str,
                 int k, std::uint64_t seed, bool with_uncertainty, int learners, double shrinkage) {
  std::filesystem::path data_root = require_root(root);
  PiStore pi(data_root);
  WeatherTable wx = WeatherTable::load_dir(data_root / "wx");
  TrainingConfig cfg = build_config(with_uncertainty, learners, shrinkage);
  ValidationReport report =
      validate_all_sectors(pi, require_date(from_str), require_date(to_str), k, seed, cfg, wx);
  for (const SectorValidationOutcome& s : report.sectors) {
    if (s.ok()) {
      std::printf("%s: mean score %.4f over %d folds\n", s.sector.c_str(), s.cv.mean_score,
                  report.k);
    } else {
      std::fprintf(stderr, "%s: failed: %s\n", s.sector.c_str(), s.error.c_str());
    }
  }
  std::printf("mean score %.4f (k=%d, seed=%llu)\n", report.mean_score, report.k,
              static_cast<unsigned long long>(report.seed));
  return 0;
}

int cmd_predict(const std::string& root, const std::string& sector, const std::string& start_str,
                const std::string& end_str, int step) {
  ModelStore store(require_root(root));
  PredictionRequest req;
  req.sector = sector;
  req.start_time = require_timestamp(start_str);
  req.end_time = require_timestamp(end_str);
  req.step_minutes = step;
  ServeResult r = handle_predict_request(req, store);
  std::printf("%s\n", r.body.dump(2).c_str());
  return r.status == 200 ? 0 : 1;
}

int cmd_serve(const std::string& root, int port) {
  ServiceState state(require_root(root));
  httplib::Server srv;
  register_routes(srv, state);
  std::printf("serving %s on port %d\n", state.root.string().c_str(), port);
  if (!srv.listen("0.0.0.0", port)) {
    std::fprintf(stderr, "cannot listen on port %d\n", port);
    return 1;
  }
  return 0;
}

int cmd_gen(const std::string& spec_path, std::uint64_t seed, bool seed_given,
            const std::string& out_dir) {
  ScenarioSpec spec = load_scenario_spec(spec_path);
  if (seed_given) spec.seed = seed;
  Scenario scn = generate_scenario(spec);
  write_scenario(scn, out_dir);
  std::size_t messages = 0;
  std::size_t flights = 0;
  for (const DayScenario& d : scn.days) {
    messages += d.messages.size();
    flights += d.truth.size();
  }
  std::printf("wrote %zu days, %zu flights, %zu messages to %s\n", scn.days.size(), flights,
              messages, out_dir.c_str());
  return 0;
}

int cmd_plot(const std::string& root, const std::string& kind_str, const std::string& out,
             const std::string& sector, const std::string& day_str, const std::string& from_str,
             const std::string& to_str) {
  PlotKind kind = plot_kind_from_name(kind_str);
  PlotParams params;
  params.sector = sector;
  auto need = [](const std::string& value, const char* flag, const char* kind_name) {
    if (value.empty()) {
      throw std::runtime_error(std::string(flag) + " is required for " + kind_name);
    }
    return value;
  };
  switch (kind) {
    case PlotKind::SectorCurve:
      need(sector, "--sector", "sectorCurve");
      params.day = require_date(need(day_str, "--day", "sectorCurve"));
      break;
    case PlotKind::Convergence:
      need(sector, "--sector", "convergence");
      break;
    case PlotKind::ScoreScatter:
      params.from = require_date(need(from_str, "--from", "scoreScatter"));
      params.to = require_date(need(to_str, "--to", "scoreScatter"));
      break;
    case PlotKind::Heatmap:
      params.day = require_date(need(day_str, "--day", "heatmap"));
      break;
  }
  std::filesystem::path data_root = require_root(root);
  PiStore pi(data_root);
  ModelStore store(data_root);
  emit_plot(kind, params, pi, store, out);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_prune(const std::string& root, const std::string& before_str) {
  UtcDate before = require_date(before_str);
  std::filesystem::path raw_dir = require_root(root) / "raw";
  int removed = 0;
  if (std::filesystem::is_directory(raw_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(raw_dir)) {
      if (!entry.is_directory()) continue;
      UtcDate day{};
      try {
        day = require_date(entry.path().filename().string());
      } catch (const std::exception&) {
        continue;  // not a daily collection
      }
      if (day_start(day) < day_start(before)) {
        std::filesystem::remove_all(entry.path());
        ++removed;
      }
    }
  }
  std::printf("pruned %d raw daily collections before %s\n", removed, format_date(before).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sector congestion prediction pipeline"};
  app.require_subcommand(1);

  std::string root;
  std::string day_str, input, sector, weekday_str, from_str, to_str, start_str, end_str;
  std::string spec_path, out_path, kind_str, before_str;
  bool with_uncertainty = false;
  int learners = 400;
  double shrinkage = 0.1;
  int k = 5;
  std::uint64_t seed = 1;
  int step = 1;
  int port = 8080;

  auto add_root = [&](CLI::App* sub) {
    sub->add_option("--root", root, "data root directory")->envname("SECTOR_CONGEST_ROOT");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "append raw message lines to a daily collection");
  add_root(ingest);
  ingest->add_option("--day", day_str, "collection day, YYYY-MM-DD")->required();
  ingest->add_option("--input", input, "line file, or - for stdin")->required();

  CLI::App* prepare = app.add_subcommand("prepare", "run the preparation steps for one day");
  add_root(prepare);
  prepare->add_option("--day", day_str, "day to prepare, YYYY-MM-DD")->required();

  CLI::App* filter = app.add_subcommand("filter", "show outlier rejection for a sector weekday");
  add_root(filter);
  filter->add_option("--sector", sector, "sector name")->required();
  filter->add_option("--weekday", weekday_str, "weekday, Mon..Sun")->required();

  CLI::App* train = app.add_subcommand("train", "train and store one model per sector");
  add_root(train);
  train->add_option("--from", from_str, "first day, YYYY-MM-DD")->required();
  train->add_option("--to", to_str, "last day, YYYY-MM-DD")->required();
  train->add_flag("--with-uncertainty", with_uncertainty, "add the uncertainty input feature");
  train->add_option("--learners", learners, "boosting iterations");
  train->add_option("--shrinkage", shrinkage, "boosting shrinkage");

  CLI::App* validate = app.add_subcommand("validate", "cross-validate each sector over a range");
  add_root(validate);
  validate->add_option("--from", from_str, "first day, YYYY-MM-DD")->required();
  validate->add_option("--to", to_str, "last day, YYYY-MM-DD")->required();
  validate->add_option("--k", k, "fold count");
  validate->add_option("--seed", seed, "shuffle seed");
  validate->add_flag("--with-uncertainty", with_uncertainty, "add the uncertainty input feature");
  validate->add_option("--learners", learners, "boosting iterations");
  validate->add_option("--shrinkage", shrinkage, "boosting shrinkage");

  CLI::App* predict = app.add_subcommand("predict", "predict counts for a sector and horizon");
  add_root(predict);
  predict->add_option("--sector", sector, "sector name")->required();
  predict->add_option("--start", start_str, "horizon start, RFC 3339")->required();
  predict->add_option("--end", end_str, "horizon end, RFC 3339")->required();
  predict->add_option("--step", step, "bucket stride in minutes");

  CLI::App* serve = app.add_subcommand("serve", "run the prediction service");
  add_root(serve);
  serve->add_option("--port", port, "listen port");

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic scenario");
  gen->add_option("--spec", spec_path, "scenario spec JSON file")->required();
  CLI::Option* seed_opt = gen->add_option("--seed", seed, "override the spec's seed");
  gen->add_option("--out", out_path, "output directory")->required();

  CLI::App* plot = app.add_subcommand("plot", "emit a CSV plot artifact");
  add_root(plot);
  plot->add_option("--kind", kind_str, "sectorCurve | convergence | scoreScatter | heatmap")
      ->required();
  plot->add_option("--out", out_path, "output CSV path")->required();
  plot->add_option("--sector", sector, "sector name");
  plot->add_option("--day", day_str, "day, YYYY-MM-DD");
  plot->add_option("--from", from_str, "first day, YYYY-MM-DD");
  plot->add_option("--to", to_str, "last day, YYYY-MM-DD");

  CLI::App* prune = app.add_subcommand("prune", "delete raw daily collections before a date");
  add_root(prune);
  prune->add_option("--before", before_str, "cutoff day, YYYY-MM-DD")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(root, day_str, input);
    if (prepare->parsed()) return cmd_prepare(root, day_str);
    if (filter->parsed()) return cmd_filter(root, sector, weekday_str);
    if (train->parsed()) return cmd_train(root, from_str, to_str, with_uncertainty, learners,
                                          shrinkage);
    if (validate->parsed()) return cmd_validate(root, from_str, to_str, k, seed, with_uncertainty,
                                                learners, shrinkage);
    if (predict->parsed()) return cmd_predict(root, sector, start_str, end_str, step);
    if (serve->parsed()) return cmd_serve(root, port);
    if (gen->parsed()) return cmd_gen(spec_path, seed, seed_opt->count() > 0, out_path);
    if (plot->parsed()) return cmd_plot(root, kind_str, out_path, sector, day_str, from_str,
                                        to_str);
    if (prune->parsed()) return cmd_prune(root, before_str);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
