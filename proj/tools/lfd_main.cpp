// lfd: generate demonstrations, learn reference motions, plan execution
// speed, and reproduce trajectories in the servo simulator.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "lfd/config.hpp"
#include "lfd/io.hpp"
#include "lfd/pipeline.hpp"
#include "lfd/synth.hpp"

using namespace lfd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig resolve_config(const GlobalArgs& g) {
  ExperimentConfig cfg =
      g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  return cfg;
}

json metrics_header(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg);
  j["config"] = json::parse(config_to_json(cfg));
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return j;
}

std::string demo_file(int index, Tool tool) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "demo%02d_%s.csv", index + 1,
                to_string(tool).c_str());
  return buf;
}

// ---------------------------------------------------------------- gen-demos
int cmd_gen_demos(const GlobalArgs& g) {
  const ExperimentConfig cfg = resolve_config(g);
  const fs::path dir = fs::path(g.out_dir) / "demos";
  fs::create_directories(dir);
  const auto demos = gen_demos(cfg.demo, cfg.seed);
  for (std::size_t k = 0; k < demos.size(); ++k) {
    write_trajectory_csv(dir / demo_file(static_cast<int>(k), Tool::A),
                         demo_rows(demos[k], Tool::A));
    write_trajectory_csv(dir / demo_file(static_cast<int>(k), Tool::B),
                         demo_rows(demos[k], Tool::B));
  }
  save_config(cfg, fs::path(g.out_dir) / "resolved_config.json");
  std::printf("wrote %zu demonstrations to %s\n", demos.size(),
              dir.string().c_str());
  return 0;
}

std::vector<Demonstration> load_demos(const ExperimentConfig& cfg,
                                      const fs::path& out_dir) {
  const fs::path dir = out_dir / "demos";
  std::vector<Demonstration> demos;
  for (int k = 0; k < cfg.demo.demo_count; ++k) {
    const fs::path a = dir / demo_file(k, Tool::A);
    const fs::path b = dir / demo_file(k, Tool::B);
    char id[16];
    std::snprintf(id, sizeof(id), "demo%02d", k + 1);
    demos.push_back(
        merge_demo_rows(id, read_trajectory_csv(a), read_trajectory_csv(b)));
  }
  return demos;
}

std::string reference_file(int primitive, Tool tool, bool retimed) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "reference%s_p%d_%s.csv",
                retimed ? "_retimed" : "", primitive,
                to_string(tool).c_str());
  return buf;
}

// ---------------------------------------------------------------- learn
int cmd_learn(const GlobalArgs& g) {
  const ExperimentConfig cfg = resolve_config(g);
  const auto demos = load_demos(cfg, g.out_dir);
  const PipelineResult result = run_pipeline(demos, cfg);

  std::vector<PrimitiveModel> models;
  for (const auto& learned : result.primitives) {
    models.push_back(learned.model);
    write_trajectory_csv(
        fs::path(g.out_dir) /
            reference_file(learned.model.primitive, learned.model.tool, false),
        reference_rows(learned.reference, Frame::ObjectLocal));
  }
  write_model_json(fs::path(g.out_dir) / "model.json", models, cfg.seed,
                   config_hash(cfg));
  std::printf("learned %zu primitives -> %s\n", models.size(),
              (fs::path(g.out_dir) / "model.json").string().c_str());
  return 0;
}

/// Rebuilds the per-primitive references, envelopes and plans from the model
/// file (GMR at the stored base timestamps).
std::vector<LearnedPrimitive> rebuild_from_model(const ExperimentConfig& cfg,
                                                 const fs::path& out_dir) {
  const auto models = read_model_json(out_dir / "model.json");
  std::vector<LearnedPrimitive> primitives;
  for (const auto& model : models) {
    LearnedPrimitive learned;
    learned.model = model;
    learned.reference.primitive = model.primitive;
    for (double t : model.base_times) {
      const GmrResult gr = gmr(model.gmm, t);
      ReferencePoint pt;
      pt.t = t;
      pt.pose = Pose::from_euler(gr.mean[0], gr.mean[1], gr.mean[2],
                                 gr.mean[3], gr.mean[4], gr.mean[5]);
      for (int d = 0; d < 6; ++d) {
        pt.stddev[d] = std::sqrt(std::max(0.0, gr.covariance(d, d)));
      }
      learned.reference.points.push_back(pt);
    }
    learned.env = envelope(learned.reference);
    learned.raw_plan.r.reserve(learned.env.size());
    for (std::size_t i = 0; i < learned.env.size(); ++i) {
      learned.raw_plan.r.push_back(
          classify(learned.env.v_t[i], learned.env.v_r[i], cfg.thresholds));
    }
    learned.plan = cfg.smooth_width > 1
                       ? majority_smooth(learned.raw_plan, cfg.smooth_width)
                       : learned.raw_plan;
    learned.retimed = retime(learned.reference, learned.plan);
    primitives.push_back(std::move(learned));
  }
  return primitives;
}

// ---------------------------------------------------------------- plan
int cmd_plan(const GlobalArgs& g) {
  const ExperimentConfig cfg = resolve_config(g);
  const auto primitives = rebuild_from_model(cfg, g.out_dir);
  for (const auto& learned : primitives) {
    std::vector<PlanRow> rows;
    for (std::size_t i = 0; i < learned.plan.size(); ++i) {
      rows.push_back({learned.reference.points[i].t, learned.env.v_t[i],
                      learned.env.v_r[i], learned.raw_plan.r[i],
                      learned.plan.r[i]});
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "plan_p%d_%s.csv",
                  learned.model.primitive,
                  to_string(learned.model.tool).c_str());
    write_plan_csv(fs::path(g.out_dir) / buf, rows);
    write_trajectory_csv(
        fs::path(g.out_dir) /
            reference_file(learned.model.primitive, learned.model.tool, true),
        reference_rows(learned.retimed, Frame::ObjectLocal));
  }
  std::printf("planned %zu primitives in %s\n", primitives.size(),
              g.out_dir.c_str());
  return 0;
}

json metrics_json(const EvalMetrics& m) {
  return {{"translation_mm", m.mean_translation_mm},
          {"rotation_deg", m.mean_rotation_deg},
          {"duration_s", m.duration_s}};
}

// ---------------------------------------------------------------- simulate
int cmd_simulate(const GlobalArgs& g, const std::string& mode_name,
                 const std::string& scenario_name, int factor) {
  const ExperimentConfig cfg = resolve_config(g);
  const ServoMode mode =
      mode_name == "open" ? ServoMode::OpenLoop : ServoMode::VisualServo;
  fs::create_directories(g.out_dir);

  json report = metrics_header(cfg);
  report["mode"] = mode_name;
  report["scenario"] = scenario_name;

  if (scenario_name == "stitch") {
    const auto primitives = rebuild_from_model(cfg, g.out_dir);
    PipelineResult result;
    result.primitives = primitives;
    const auto demos = load_demos(cfg, g.out_dir);
    const Scenario scenario = build_stitch_scenario(result, demos[0], cfg);
    const TraceRecord trace = servo_loop(scenario, cfg.robot, cfg.camera, mode,
                                         nullptr, cfg.sim_options());
    const fs::path trace_path =
        fs::path(g.out_dir) / ("trace_stitch_" + mode_name + ".csv");
    write_trace_csv(trace_path, trace);
    report["trace"] = trace_path.string();
    report["ticks"] = trace.rows.size();
  } else {
    std::vector<TraceRecord> traces;
    const auto trials = run_reproduction_trials(cfg, mode, &traces, factor);
    json runs = json::array();
    // the dense robot-frame reference all trials share
    const ReproductionSetup setup = make_reproduction_setup(
        cfg.robot.hand_eye_bias, derive_seed(cfg.seed, "trial", 0), factor,
        cfg.waypoint_period, cfg.reproduction_duration);
    write_trajectory_csv(fs::path(g.out_dir) / "eval_reference.csv",
                         reference_rows(setup.eval_reference, Frame::World));
    for (std::size_t i = 0; i < trials.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "trace_%s_f%d_t%02d.csv",
                    mode_name.c_str(), factor, trials[i].trial);
      const fs::path trace_path = fs::path(g.out_dir) / buf;
      write_trace_csv(trace_path, traces[i]);
      json run = metrics_json(trials[i].metrics);
      run["trial"] = trials[i].trial;
      run["trace"] = trace_path.string();
      runs.push_back(run);
    }
    report["factor"] = factor;
    report["trials"] = runs;
  }

  const fs::path out = fs::path(g.out_dir) /
                       ("metrics_" + scenario_name + "_" + mode_name + ".json");
  write_json(out, report);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

// ---------------------------------------------------------------- evaluate
int cmd_evaluate(const GlobalArgs& g, const std::string& trace_path,
                 const std::string& reference_path) {
  const ExperimentConfig cfg = resolve_config(g);
  const TraceRecord trace = read_trace_csv(trace_path);
  const auto rows = read_trajectory_csv(reference_path);
  const ReferenceTrajectory reference = reference_from_rows(rows, 1);
  const EvalMetrics m = evaluate(trace, reference);
  json j = metrics_header(cfg);
  j["trace"] = trace_path;
  j["reference"] = reference_path;
  j["metrics"] = metrics_json(m);
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------- sweep
int cmd_sweep(const GlobalArgs& g) {
  const ExperimentConfig cfg = resolve_config(g);
  fs::create_directories(g.out_dir);
  const auto points = run_speed_sweep(cfg);

  json report = metrics_header(cfg);
  json series = json::array();
  for (const auto& p : points) {
    series.push_back({{"factor", p.factor},
                      {"duration_s", p.mean_duration_s},
                      {"translation_mm", p.mean_translation_mm},
                      {"rotation_deg", p.mean_rotation_deg}});
  }
  report["sweep"] = series;

  json bias_series = json::array();
  for (const auto& p : run_bias_sweep(cfg)) {
    bias_series.push_back({{"bias_mm", p.bias_mm},
                           {"open_loop_mm", p.open_loop_translation_mm},
                           {"servo_mm", p.servo_translation_mm}});
  }
  report["bias_sweep"] = bias_series;

  json latency_series = json::array();
  for (const auto& p : run_latency_sweep(cfg)) {
    latency_series.push_back(
        {{"latency_s", p.latency_s},
         {"compensated_mm", p.compensated_translation_mm},
         {"uncompensated_mm", p.uncompensated_translation_mm}});
  }
  report["latency_sweep"] = latency_series;
  write_json(fs::path(g.out_dir) / "sweep.json", report);

  // plot-ready series
  std::ofstream csv(fs::path(g.out_dir) / "sweep_series.csv");
  csv << "factor,duration_s,translation_mm,rotation_deg\n";
  for (const auto& p : points) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", p.factor,
                  p.mean_duration_s, p.mean_translation_mm,
                  p.mean_rotation_deg);
    csv << buf;
  }
  std::printf("wrote %s and sweep_series.csv\n",
              (fs::path(g.out_dir) / "sweep.json").string().c_str());
  return 0;
}

// ---------------------------------------------------------------- report
int cmd_report(const GlobalArgs& g) {
  const ExperimentConfig cfg = resolve_config(g);
  json report = metrics_header(cfg);

  const fs::path open_path =
      fs::path(g.out_dir) / "metrics_reproduction_open.json";
  const fs::path servo_path =
      fs::path(g.out_dir) / "metrics_reproduction_servo.json";
  json table = json::array();
  std::printf("%-22s %18s %18s\n", "Error", "Translation (mm)",
              "Rotation (degree)");
  if (fs::exists(open_path)) {
    const json open = read_json(open_path);
    double t = 0, r = 0;
    int n = 0;
    for (const auto& run : open.at("trials")) {
      t += run.at("translation_mm").get<double>();
      r += run.at("rotation_deg").get<double>();
      ++n;
    }
    json row = {{"label", "No Visual Servoing"},
                {"translation_mm", t / n},
                {"rotation_deg", r / n}};
    table.push_back(row);
    std::printf("%-22s %18.2f %18.2f\n", "No Visual Servoing", t / n, r / n);
  }
  if (fs::exists(servo_path)) {
    const json servo = read_json(servo_path);
    for (const auto& run : servo.at("trials")) {
      const int trial = run.at("trial").get<int>();
      char label[24];
      std::snprintf(label, sizeof(label), "Trial %d", trial + 1);
      json row = {{"label", label},
                  {"translation_mm", run.at("translation_mm")},
                  {"rotation_deg", run.at("rotation_deg")}};
      table.push_back(row);
      std::printf("%-22s %18.2f %18.2f\n", label,
                  run.at("translation_mm").get<double>(),
                  run.at("rotation_deg").get<double>());
    }
  }
  if (table.empty()) {
    throw IoError("no metrics files in " + g.out_dir +
                  "; run `lfd simulate` first");
  }
  report["table"] = table;
  const fs::path sweep_path = fs::path(g.out_dir) / "sweep.json";
  if (fs::exists(sweep_path)) {
    report["sweep"] = read_json(sweep_path).at("sweep");
  }
  write_json(fs::path(g.out_dir) / "report.json", report);
  std::printf("wrote %s\n",
              (fs::path(g.out_dir) / "report.json").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-from-demonstration trajectory toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config JSON");
  app.add_option("--out-dir", g.out_dir, "artifact directory")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed");

  app.add_subcommand("gen-demos", "generate synthetic demonstrations")->fallthrough();
  app.add_subcommand("learn", "align, segment and encode the demonstrations")->fallthrough();
  app.add_subcommand("plan", "derive variance envelopes and speed plans")->fallthrough();

  auto* sim = app.add_subcommand("simulate", "run the servo-loop simulator");
  sim->fallthrough();
  std::string mode = "servo";
  std::string scenario = "reproduction";
  int factor = 1;
  sim->add_option("--mode", mode, "open | servo")->capture_default_str();
  sim->add_option("--scenario", scenario, "reproduction | stitch")
      ->capture_default_str();
  sim->add_option("--factor", factor, "reference down-sampling factor")
      ->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "score a trace against a reference");
  eval->fallthrough();
  std::string trace_path, reference_path;
  eval->add_option("--trace", trace_path, "trace CSV")->required();
  eval->add_option("--reference", reference_path, "reference trajectory CSV")
      ->required();

  app.add_subcommand("sweep", "speed/accuracy sweep over down-sampling factors")->fallthrough();
  app.add_subcommand("report", "aggregate metrics into a report table")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (app.got_subcommand("gen-demos")) return cmd_gen_demos(g);
    if (app.got_subcommand("learn")) return cmd_learn(g);
    if (app.got_subcommand("plan")) return cmd_plan(g);
    if (app.got_subcommand("simulate")) {
      if (mode != "open" && mode != "servo") {
        throw ConfigError("--mode must be open or servo");
      }
      if (scenario != "reproduction" && scenario != "stitch") {
        throw ConfigError("--scenario must be reproduction or stitch");
      }
      return cmd_simulate(g, mode, scenario, factor);
    }
    if (app.got_subcommand("evaluate")) {
      return cmd_evaluate(g, trace_path, reference_path);
    }
    if (app.got_subcommand("sweep")) return cmd_sweep(g);
    if (app.got_subcommand("report")) return cmd_report(g);
  } catch (const Error& e) {
    json err = {{"error", {{"type", e.type()}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err = {{"error", {{"type", "Unexpected"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
