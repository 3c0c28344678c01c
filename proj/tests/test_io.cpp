#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lfd/config.hpp"
#include "lfd/io.hpp"
#include "lfd/synth.hpp"
#include "support/oracles.hpp"

using namespace lfd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "lfd_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("trajectory csv round-trips byte for byte") {
  const auto demos = gen_demos(SyntheticDemoSpec{}, 5);
  const auto rows = demo_rows(demos[0], Tool::A);
  const fs::path p1 = temp_dir() / "demo_a.csv";
  const fs::path p2 = temp_dir() / "demo_a_rewrite.csv";
  write_trajectory_csv(p1, rows);
  write_trajectory_csv(p2, read_trajectory_csv(p1));
  CHECK(slurp(p1) == slurp(p2));
  CHECK(!slurp(p1).empty());
}

TEST_CASE("demo splits into per-tool files and merges back") {
  const auto demos = gen_demos(SyntheticDemoSpec{}, 5);
  const auto rows_a = demo_rows(demos[0], Tool::A);
  const auto rows_b = demo_rows(demos[0], Tool::B);
  const Demonstration merged = merge_demo_rows("demo01", rows_a, rows_b);
  REQUIRE(merged.samples.size() == demos[0].samples.size());
  for (std::size_t i = 0; i < merged.samples.size(); ++i) {
    CHECK(merged.samples[i].t == demos[0].samples[i].t);
    CHECK((merged.samples[i].pose_a.translation -
           demos[0].samples[i].pose_a.translation)
              .norm() < 1e-12);
    CHECK(rotation_angle(merged.samples[i].pose_a.orientation,
                         demos[0].samples[i].pose_a.orientation) < 1e-9);
    CHECK(merged.samples[i].holder == demos[0].samples[i].holder);
  }
  SUBCASE("mismatched timestamps are rejected") {
    auto bad = rows_b;
    bad[3].t += 0.05;
    CHECK_THROWS_AS(merge_demo_rows("x", rows_a, bad), TimestampMismatch);
  }
}

TEST_CASE("plan csv round-trips byte for byte") {
  std::vector<PlanRow> rows;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    rows.push_back({0.1 * i, 0.02 * u(rng), 0.3 * u(rng),
                    i % 3 == 0 ? 0.5 : 1.0, i % 3 == 0 ? 0.5 : 1.0});
  }
  const fs::path p1 = temp_dir() / "plan.csv";
  const fs::path p2 = temp_dir() / "plan_rewrite.csv";
  write_plan_csv(p1, rows);
  write_plan_csv(p2, read_plan_csv(p1));
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("trace csv round-trips byte for byte") {
  std::mt19937_64 rng(37);
  TraceRecord trace;
  for (int i = 0; i < 50; ++i) {
    TraceRow row;
    row.tick = i;
    row.clock = 0.01 * i;
    row.primitive = 1 + (i % 5);
    row.tool = i % 2 == 0 ? Tool::A : Tool::B;
    row.r = i % 3 == 0 ? 0.5 : 2.0;
    row.truth = oracles::random_pose(rng).to_vector6();
    row.commanded = oracles::random_pose(rng).to_vector6();
    row.estimate_valid = i % 2 == 0;
    if (row.estimate_valid) row.estimate = oracles::random_pose(rng).to_vector6();
    row.measurement_valid = i % 7 == 0;
    if (row.measurement_valid) {
      row.measurement = oracles::random_pose(rng).to_vector6();
    }
    trace.rows.push_back(row);
  }
  const fs::path p1 = temp_dir() / "trace.csv";
  const fs::path p2 = temp_dir() / "trace_rewrite.csv";
  write_trace_csv(p1, trace);
  write_trace_csv(p2, read_trace_csv(p1));
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("model json round-trips byte for byte and validates") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<PrimitiveModel> models;
  for (int p = 1; p <= 2; ++p) {
    PrimitiveModel m;
    m.primitive = p;
    m.tool = p == 1 ? Tool::A : Tool::B;
    m.frame = p == 1 ? ReferenceFrame::Mandrel : ReferenceFrame::Needle;
    m.base_times = {0.0, 0.5, 1.0};
    const int dim = 7, comps = 2;
    m.gmm.priors = Eigen::VectorXd::Constant(comps, 0.5);
    for (int c = 0; c < comps; ++c) {
      Eigen::VectorXd mean(dim);
      for (int d = 0; d < dim; ++d) mean[d] = gauss(rng);
      Eigen::MatrixXd a(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a(i, j) = gauss(rng);
      }
      m.gmm.means.push_back(mean);
      m.gmm.covariances.push_back(a * a.transpose() +
                                  Eigen::MatrixXd::Identity(dim, dim));
    }
    models.push_back(m);
  }
  const fs::path p1 = temp_dir() / "model.json";
  const fs::path p2 = temp_dir() / "model_rewrite.json";
  write_model_json(p1, models, 42, "deadbeefdeadbeef");
  const auto loaded = read_model_json(p1);
  REQUIRE(loaded.size() == models.size());
  write_model_json(p2, loaded, 42, "deadbeefdeadbeef");
  CHECK(slurp(p1) == slurp(p2));
  CHECK(loaded[1].frame == ReferenceFrame::Needle);
  CHECK((loaded[0].gmm.means[0] - models[0].gmm.means[0]).norm() == 0.0);
}

TEST_CASE("config round trip preserves the hash") {
  ExperimentConfig cfg = default_config();
  cfg.seed = 777;
  cfg.camera.dropout_prob = 0.05;
  cfg.m_range = {2, 3};
  const std::string json = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(json);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.seed == 777);
  CHECK(back.m_range == std::vector<int>{2, 3});
  CHECK(back.camera.dropout_prob == doctest::Approx(0.05));

  const fs::path p = temp_dir() / "config.json";
  save_config(cfg, p);
  const ExperimentConfig loaded = load_config(p);
  CHECK(config_hash(loaded) == config_hash(cfg));
}

TEST_CASE("config validation rejects bad values") {
  CHECK_THROWS_AS(config_from_json("{\"learning\":{\"cv_folds\":1}}"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"camera\":{\"frame_rate_hz\":0}}"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json("{\"filter\":{\"noise_units\":\"sigma\"}}"),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_json("{\"experiment\":{\"bias_direction\":[0,0,0]}}"),
      ConfigError);
}

TEST_CASE("missing files produce errors naming the path") {
  const fs::path missing = temp_dir() / "does_not_exist.csv";
  try {
    read_trajectory_csv(missing);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("does_not_exist.csv") !=
          std::string::npos);
  }
}
