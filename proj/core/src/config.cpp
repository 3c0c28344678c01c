#include "lfd/config.hpp"

#include <fstream>

#include <json.hpp>

namespace lfd {

namespace {

using nlohmann::json;

json vec_to_json(const Vector6d& v) {
  return std::vector<double>(v.data(), v.data() + 6);
}
Vector6d vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != 6) throw ConfigError("expected a 6-element array");
  return Eigen::Map<const Vector6d>(values.data());
}
json vec3_to_json(const Eigen::Vector3d& v) {
  return std::vector<double>{v[0], v[1], v[2]};
}
Eigen::Vector3d vec3_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != 3) throw ConfigError("expected a 3-element array");
  return {values[0], values[1], values[2]};
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["demos"] = {{"count", c.demo.demo_count},
                {"sample_period_s", c.demo.sample_period},
                {"free_translation_std_mm", c.demo.free_translation_std},
                {"contact_translation_std_mm", c.demo.contact_translation_std},
                {"free_rotation_std_rad", c.demo.free_rotation_std},
                {"contact_rotation_std_rad", c.demo.contact_rotation_std}};
  j["learning"] = {{"m_range", c.m_range},
                   {"cv_folds", c.cv_folds},
                   {"max_iterations", c.fit.max_iterations},
                   {"loglik_tolerance", c.fit.loglik_tolerance},
                   {"regularization", c.fit.regularization},
                   {"dtw_rotation_weight_mm_per_rad", c.dtw_rotation_weight},
                   {"smooth_width", c.smooth_width},
                   {"align_base", c.align_base}};
  j["context"] = {{"vt_fast_m", c.thresholds.vt_fast},
                  {"vt_slow_m", c.thresholds.vt_slow},
                  {"vr_fast_rad", c.thresholds.vr_fast},
                  {"vr_slow_rad", c.thresholds.vr_slow},
                  {"r_fast", c.thresholds.r_fast},
                  {"r_mid", c.thresholds.r_mid},
                  {"r_slow", c.thresholds.r_slow}};
  j["robot"] = {{"max_linear_speed_mm_s", c.robot.max_linear_speed},
                {"max_angular_speed_rad_s", c.robot.max_angular_speed},
                {"control_period_s", c.robot.control_period},
                {"actuation_noise_std", vec_to_json(c.robot.actuation_noise_std)}};
  j["camera"] = {{"frame_rate_hz", 1.0 / c.camera.frame_period},
                 {"latency_s", c.camera.latency},
                 {"measurement_noise_std", vec_to_json(c.camera.measurement_noise_std)},
                 {"dropout_prob", c.camera.dropout_prob},
                 {"fb_tau_inlier_px", c.camera.fb_tau_inlier},
                 {"fb_tau_reject_px", c.camera.fb_tau_reject},
                 {"fb_corner_noise_px", c.camera.fb_corner_noise_px},
                 {"fb_outlier_prob", c.camera.fb_outlier_prob}};
  j["filter"] = {{"q_diag", vec_to_json(c.q_diag)},
                 {"r_diag", vec_to_json(c.r_diag)},
                 {"noise_units",
                  c.noise_units == NoiseUnits::Variance ? "variance" : "stddev"},
                 {"latency_compensation", c.latency_compensation}};
  j["servo"] = {{"translation_gain", c.gains.translation},
                {"rotation_gain", c.gains.rotation}};
  j["sim"] = {{"stage_time_s", c.stage_time},
              {"settle_time_s", c.settle_time},
              {"divergence_limit_mm", c.divergence_limit}};
  j["experiment"] = {{"trials", c.trials},
                     {"bias_mm", c.bias_mm},
                     {"bias_direction", vec3_to_json(c.bias_direction)},
                     {"bias_euler_rad", vec3_to_json(c.bias_euler)},
                     {"waypoint_period_s", c.waypoint_period},
                     {"duration_s", c.reproduction_duration},
                     {"sweep_factors", c.sweep_factors},
                     {"sweep_bias_mm", c.sweep_bias_mm},
                     {"sweep_latency_s", c.sweep_latency_s}};
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}
void maybe_vec6(const json& j, const char* key, Vector6d& value) {
  if (j.contains(key)) value = vec_from_json(j.at(key));
}
void maybe_vec3(const json& j, const char* key, Eigen::Vector3d& value) {
  if (j.contains(key)) value = vec3_from_json(j.at(key));
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  maybe(j, "seed", c.seed);
  if (j.contains("demos")) {
    const auto& d = j.at("demos");
    maybe(d, "count", c.demo.demo_count);
    maybe(d, "sample_period_s", c.demo.sample_period);
    maybe(d, "free_translation_std_mm", c.demo.free_translation_std);
    maybe(d, "contact_translation_std_mm", c.demo.contact_translation_std);
    maybe(d, "free_rotation_std_rad", c.demo.free_rotation_std);
    maybe(d, "contact_rotation_std_rad", c.demo.contact_rotation_std);
  }
  if (j.contains("learning")) {
    const auto& l = j.at("learning");
    maybe(l, "m_range", c.m_range);
    maybe(l, "cv_folds", c.cv_folds);
    maybe(l, "max_iterations", c.fit.max_iterations);
    maybe(l, "loglik_tolerance", c.fit.loglik_tolerance);
    maybe(l, "regularization", c.fit.regularization);
    maybe(l, "dtw_rotation_weight_mm_per_rad", c.dtw_rotation_weight);
    maybe(l, "smooth_width", c.smooth_width);
    maybe(l, "align_base", c.align_base);
  }
  if (j.contains("context")) {
    const auto& t = j.at("context");
    maybe(t, "vt_fast_m", c.thresholds.vt_fast);
    maybe(t, "vt_slow_m", c.thresholds.vt_slow);
    maybe(t, "vr_fast_rad", c.thresholds.vr_fast);
    maybe(t, "vr_slow_rad", c.thresholds.vr_slow);
    maybe(t, "r_fast", c.thresholds.r_fast);
    maybe(t, "r_mid", c.thresholds.r_mid);
    maybe(t, "r_slow", c.thresholds.r_slow);
  }
  if (j.contains("robot")) {
    const auto& r = j.at("robot");
    maybe(r, "max_linear_speed_mm_s", c.robot.max_linear_speed);
    maybe(r, "max_angular_speed_rad_s", c.robot.max_angular_speed);
    maybe(r, "control_period_s", c.robot.control_period);
    maybe_vec6(r, "actuation_noise_std", c.robot.actuation_noise_std);
  }
  if (j.contains("camera")) {
    const auto& cam = j.at("camera");
    if (cam.contains("frame_rate_hz")) {
      const double hz = cam.at("frame_rate_hz").get<double>();
      if (hz <= 0.0) throw ConfigError("frame_rate_hz must be positive");
      c.camera.frame_period = 1.0 / hz;
    }
    maybe(cam, "latency_s", c.camera.latency);
    maybe_vec6(cam, "measurement_noise_std", c.camera.measurement_noise_std);
    maybe(cam, "dropout_prob", c.camera.dropout_prob);
    maybe(cam, "fb_tau_inlier_px", c.camera.fb_tau_inlier);
    maybe(cam, "fb_tau_reject_px", c.camera.fb_tau_reject);
    maybe(cam, "fb_corner_noise_px", c.camera.fb_corner_noise_px);
    maybe(cam, "fb_outlier_prob", c.camera.fb_outlier_prob);
  }
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    maybe_vec6(f, "q_diag", c.q_diag);
    maybe_vec6(f, "r_diag", c.r_diag);
    if (f.contains("noise_units")) {
      const auto units = f.at("noise_units").get<std::string>();
      if (units == "variance") {
        c.noise_units = NoiseUnits::Variance;
      } else if (units == "stddev") {
        c.noise_units = NoiseUnits::StdDev;
      } else {
        throw ConfigError("noise_units must be 'variance' or 'stddev'");
      }
    }
    maybe(f, "latency_compensation", c.latency_compensation);
  }
  if (j.contains("servo")) {
    maybe(j.at("servo"), "translation_gain", c.gains.translation);
    maybe(j.at("servo"), "rotation_gain", c.gains.rotation);
  }
  if (j.contains("sim")) {
    maybe(j.at("sim"), "stage_time_s", c.stage_time);
    maybe(j.at("sim"), "settle_time_s", c.settle_time);
    maybe(j.at("sim"), "divergence_limit_mm", c.divergence_limit);
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    maybe(e, "trials", c.trials);
    maybe(e, "bias_mm", c.bias_mm);
    maybe_vec3(e, "bias_direction", c.bias_direction);
    maybe_vec3(e, "bias_euler_rad", c.bias_euler);
    maybe(e, "waypoint_period_s", c.waypoint_period);
    maybe(e, "duration_s", c.reproduction_duration);
    maybe(e, "sweep_factors", c.sweep_factors);
    maybe(e, "sweep_bias_mm", c.sweep_bias_mm);
    maybe(e, "sweep_latency_s", c.sweep_latency_s);
  }

  if (c.bias_direction.norm() < 1e-12) {
    throw ConfigError("bias_direction must be a nonzero vector");
  }
  c.bias_direction.normalize();
  c.robot.hand_eye_bias = c.bias_at(c.bias_mm);

  // Range checks mirroring the model invariants, so bad values fail at load
  // rather than mid-run.
  if (c.robot.max_linear_speed <= 0 || c.robot.max_angular_speed <= 0 ||
      c.robot.control_period <= 0) {
    throw ConfigError("robot speeds and control period must be positive");
  }
  if (c.camera.latency < 0 || c.camera.dropout_prob < 0 ||
      c.camera.dropout_prob > 1) {
    throw ConfigError("camera latency/dropout out of range");
  }
  if ((c.q_diag.array() <= 0).any() || (c.r_diag.array() <= 0).any()) {
    throw ConfigError("noise diagonals must be strictly positive");
  }
  if (c.cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.align_base < 0) throw ConfigError("align_base must be >= 0");
  for (int m : c.m_range) {
    if (m < 1) throw ConfigError("m_range entries must be >= 1");
  }
  return c;
}

}  // namespace

Transform ExperimentConfig::bias_at(double magnitude_mm) const {
  Eigen::Vector3d dir = bias_direction;
  if (dir.norm() < 1e-12) dir = Eigen::Vector3d::UnitZ();
  dir.normalize();
  Transform t;
  t.translation = magnitude_mm * dir;
  t.rotation = euler_zyx_to_quat(bias_euler[0], bias_euler[1], bias_euler[2])
                   .toRotationMatrix();
  return t;
}

NoiseModel ExperimentConfig::filter_noise() const {
  return NoiseModel::from_diagonals(q_diag, r_diag, noise_units);
}

SimOptions ExperimentConfig::sim_options() const {
  SimOptions opt;
  opt.gains = gains;
  opt.filter_noise = filter_noise();
  opt.latency_compensation = latency_compensation;
  opt.stage_time = stage_time;
  opt.settle_time = settle_time;
  opt.divergence_limit = divergence_limit;
  return opt;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.bias_direction.normalize();
  c.robot.hand_eye_bias = c.bias_at(c.bias_mm);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(cfg).dump(2) << "\n";
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return to_json(cfg).dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  return from_json(json::parse(text));
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (char ch : dump) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lfd
