#pragma once

#include <filesystem>
#include <string>

#include "lfd/context.hpp"
#include "lfd/gmm.hpp"
#include "lfd/sim.hpp"
#include "lfd/synth.hpp"

namespace lfd {

/// Everything an experiment run needs, loadable from one JSON file. All
/// randomness flows from `seed`; two runs of the same config and seed are
/// bit-identical.
struct ExperimentConfig {
  std::uint64_t seed = 12345;

  SyntheticDemoSpec demo;

  // learning
  std::vector<int> m_range = {2, 3, 4, 5, 6, 7, 8};
  int cv_folds = 5;
  FitOptions fit;
  double dtw_rotation_weight = 10.0;
  int smooth_width = 5;
  int align_base = 0;  // which demo supplies the index base
  ContextThresholds thresholds;

  RobotModel robot;  // hand_eye_bias filled from the experiment section
  CameraModel camera;

  Vector6d q_diag = (Vector6d() << 0.25, 0.25, 0.25, 0.02, 0.02, 0.02).finished();
  Vector6d r_diag = (Vector6d() << 0.35, 0.35, 0.35, 0.04, 0.04, 0.04).finished();
  NoiseUnits noise_units = NoiseUnits::Variance;
  bool latency_compensation = true;

  ServoGains gains;
  double stage_time = 0.5;
  double settle_time = 0.5;
  double divergence_limit = 100.0;

  // reproduction experiment
  int trials = 5;
  double bias_mm = 5.0;
  Eigen::Vector3d bias_direction{1.0, -1.0, 6.0};  // normalized at load
  Eigen::Vector3d bias_euler{0.0, 0.0, 0.0};
  double waypoint_period = 0.2;
  double reproduction_duration = 8.0;
  std::vector<int> sweep_factors = {1, 2, 4};
  std::vector<double> sweep_bias_mm = {0.0, 2.5, 5.0, 7.5, 10.0};
  std::vector<double> sweep_latency_s = {0.0, 0.05, 0.1, 0.2};

  /// Bias transform at a given translation magnitude along bias_direction.
  Transform bias_at(double magnitude_mm) const;
  NoiseModel filter_noise() const;
  SimOptions sim_options() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// JSON round trip used by reports so a metrics file embeds the exact
/// configuration that produced it.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

/// FNV-1a over the canonical JSON serialization.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace lfd
