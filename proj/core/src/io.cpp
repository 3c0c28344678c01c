#include "lfd/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lfd {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + s + "' in " + path.string());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

std::string gripper_str(GripperState g) {
  return g == GripperState::Open ? "open" : "closed";
}
GripperState gripper_from(const std::string& s,
                          const std::filesystem::path& path) {
  if (s == "open") return GripperState::Open;
  if (s == "closed") return GripperState::Closed;
  throw IoError("bad gripper value '" + s + "' in " + path.string());
}
std::string holder_str(Holder h) { return h == Holder::WithA ? "A" : "B"; }
Holder holder_from(const std::string& s, const std::filesystem::path& path) {
  if (s == "A") return Holder::WithA;
  if (s == "B") return Holder::WithB;
  throw IoError("bad holder value '" + s + "' in " + path.string());
}
std::string frame_str(Frame f) {
  return f == Frame::World ? "world" : "object";
}
Frame frame_from(const std::string& s, const std::filesystem::path& path) {
  if (s == "world") return Frame::World;
  if (s == "object") return Frame::ObjectLocal;
  throw IoError("bad frame value '" + s + "' in " + path.string());
}

constexpr const char* kTrajectoryHeader =
    "t,x_mm,y_mm,z_mm,alpha_rad,beta_rad,theta_rad,gripper_a,gripper_b,holder,"
    "frame";

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows) {
  auto out = open_out(path);
  out << kTrajectoryHeader << "\n";
  for (const auto& r : rows) {
    out << fmt(r.t);
    for (int i = 0; i < 6; ++i) out << ',' << fmt(r.pose[i]);
    out << ',' << gripper_str(r.gripper_a) << ',' << gripper_str(r.gripper_b)
        << ',' << holder_str(r.holder) << ',' << frame_str(r.frame) << "\n";
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw IoError("missing trajectory header in " + path.string());
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) {
      throw IoError("expected 11 fields per row in " + path.string());
    }
    TrajectoryRow r;
    r.t = parse_double(f[0], path);
    for (int i = 0; i < 6; ++i) r.pose[i] = parse_double(f[1 + i], path);
    r.gripper_a = gripper_from(f[7], path);
    r.gripper_b = gripper_from(f[8], path);
    r.holder = holder_from(f[9], path);
    r.frame = frame_from(f[10], path);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TrajectoryRow> demo_rows(const Demonstration& demo, Tool tool) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(demo.samples.size());
  for (const auto& s : demo.samples) {
    TrajectoryRow r;
    r.t = s.t;
    r.pose = s.pose(tool).to_vector6();
    r.gripper_a = s.gripper_a;
    r.gripper_b = s.gripper_b;
    r.holder = s.holder;
    r.frame = s.frame;
    rows.push_back(r);
  }
  return rows;
}

Demonstration merge_demo_rows(const std::string& id,
                              const std::vector<TrajectoryRow>& rows_a,
                              const std::vector<TrajectoryRow>& rows_b) {
  if (rows_a.size() != rows_b.size()) {
    throw TimestampMismatch("tool A and tool B files differ in length");
  }
  Demonstration demo;
  demo.id = id;
  demo.samples.reserve(rows_a.size());
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    if (std::abs(rows_a[i].t - rows_b[i].t) > 1e-9) {
      throw TimestampMismatch("tool files disagree on timestamps at row " +
                              std::to_string(i));
    }
    DemoSample s;
    s.t = rows_a[i].t;
    s.pose_a = Pose::from_vector6(rows_a[i].pose);
    s.pose_b = Pose::from_vector6(rows_b[i].pose);
    s.gripper_a = rows_a[i].gripper_a;
    s.gripper_b = rows_a[i].gripper_b;
    s.holder = rows_a[i].holder;
    s.frame = rows_a[i].frame;
    demo.samples.push_back(s);
  }
  return demo;
}

std::vector<TrajectoryRow> reference_rows(const ReferenceTrajectory& ref,
                                          Frame frame) {
  const auto& st = primitive_state_table().at(ref.primitive - 1);
  std::vector<TrajectoryRow> rows;
  rows.reserve(ref.size());
  for (const auto& p : ref.points) {
    TrajectoryRow r;
    r.t = p.t;
    r.pose = p.pose.to_vector6();
    r.gripper_a = st.gripper_a;
    r.gripper_b = st.gripper_b;
    r.holder = st.holder;
    r.frame = frame;
    rows.push_back(r);
  }
  return rows;
}

ReferenceTrajectory reference_from_rows(const std::vector<TrajectoryRow>& rows,
                                        int primitive) {
  ReferenceTrajectory ref;
  ref.primitive = primitive;
  for (const auto& r : rows) {
    ReferencePoint p;
    p.t = r.t;
    p.pose = Pose::from_vector6(r.pose);
    ref.points.push_back(p);
  }
  return ref;
}

void write_plan_csv(const std::filesystem::path& path,
                    const std::vector<PlanRow>& rows) {
  auto out = open_out(path);
  out << "t,v_t_m,v_r_rad,r_raw,r\n";
  for (const auto& r : rows) {
    out << fmt(r.t) << ',' << fmt(r.v_t) << ',' << fmt(r.v_r) << ','
        << fmt(r.r_raw) << ',' << fmt(r.r) << "\n";
  }
}

std::vector<PlanRow> read_plan_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,v_t_m,v_r_rad,r_raw,r") {
    throw IoError("missing plan header in " + path.string());
  }
  std::vector<PlanRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw IoError("expected 5 fields per row in " + path.string());
    rows.push_back({parse_double(f[0], path), parse_double(f[1], path),
                    parse_double(f[2], path), parse_double(f[3], path),
                    parse_double(f[4], path)});
  }
  return rows;
}

namespace {
constexpr const char* kTraceHeader =
    "tick,clock,primitive,tool,r,"
    "truth_x,truth_y,truth_z,truth_alpha,truth_beta,truth_theta,"
    "cmd_x,cmd_y,cmd_z,cmd_alpha,cmd_beta,cmd_theta,"
    "est_valid,est_x,est_y,est_z,est_alpha,est_beta,est_theta,"
    "meas_valid,meas_x,meas_y,meas_z,meas_alpha,meas_beta,meas_theta";
}  // namespace

void write_trace_csv(const std::filesystem::path& path,
                     const TraceRecord& trace) {
  auto out = open_out(path);
  out << kTraceHeader << "\n";
  for (const auto& row : trace.rows) {
    out << row.tick << ',' << fmt(row.clock) << ',' << row.primitive << ','
        << to_string(row.tool) << ',' << fmt(row.r);
    for (int i = 0; i < 6; ++i) out << ',' << fmt(row.truth[i]);
    for (int i = 0; i < 6; ++i) out << ',' << fmt(row.commanded[i]);
    out << ',' << (row.estimate_valid ? 1 : 0);
    for (int i = 0; i < 6; ++i) {
      out << ',' << fmt(row.estimate_valid ? row.estimate[i] : 0.0);
    }
    out << ',' << (row.measurement_valid ? 1 : 0);
    for (int i = 0; i < 6; ++i) {
      out << ',' << fmt(row.measurement_valid ? row.measurement[i] : 0.0);
    }
    out << "\n";
  }
}

TraceRecord read_trace_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError("missing trace header in " + path.string());
  }
  TraceRecord trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 31) throw IoError("expected 31 fields per row in " + path.string());
    TraceRow row;
    row.tick = static_cast<long>(parse_double(f[0], path));
    row.clock = parse_double(f[1], path);
    row.primitive = static_cast<int>(parse_double(f[2], path));
    row.tool = tool_from_string(f[3]);
    row.r = parse_double(f[4], path);
    for (int i = 0; i < 6; ++i) row.truth[i] = parse_double(f[5 + i], path);
    for (int i = 0; i < 6; ++i) row.commanded[i] = parse_double(f[11 + i], path);
    row.estimate_valid = parse_double(f[17], path) != 0.0;
    for (int i = 0; i < 6; ++i) row.estimate[i] = parse_double(f[18 + i], path);
    row.measurement_valid = parse_double(f[24], path) != 0.0;
    for (int i = 0; i < 6; ++i) {
      row.measurement[i] = parse_double(f[25 + i], path);
    }
    trace.rows.push_back(row);
  }
  return trace;
}

std::string to_string(Tool tool) { return tool == Tool::A ? "A" : "B"; }

Tool tool_from_string(const std::string& s) {
  if (s == "A") return Tool::A;
  if (s == "B") return Tool::B;
  throw IoError("bad tool value '" + s + "'");
}

namespace {
std::string frame_name(ReferenceFrame f) {
  return f == ReferenceFrame::Mandrel ? "mandrel" : "needle";
}
ReferenceFrame frame_name_from(const std::string& s) {
  if (s == "mandrel") return ReferenceFrame::Mandrel;
  if (s == "needle") return ReferenceFrame::Needle;
  throw IoError("bad reference frame '" + s + "'");
}
}  // namespace

void write_model_json(const std::filesystem::path& path,
                      const std::vector<PrimitiveModel>& models,
                      std::uint64_t seed, const std::string& config_hash) {
  nlohmann::json j;
  j["format"] = "lfd-model";
  j["version"] = 1;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  auto& arr = j["primitives"] = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json pj;
    pj["primitive"] = m.primitive;
    pj["tool"] = to_string(m.tool);
    pj["frame"] = frame_name(m.frame);
    pj["base_times"] = m.base_times;
    nlohmann::json gj;
    gj["components"] = m.gmm.components();
    gj["priors"] = std::vector<double>(m.gmm.priors.data(),
                                       m.gmm.priors.data() + m.gmm.priors.size());
    auto& means = gj["means"] = nlohmann::json::array();
    auto& covs = gj["covariances"] = nlohmann::json::array();
    for (int c = 0; c < m.gmm.components(); ++c) {
      means.push_back(std::vector<double>(
          m.gmm.means[c].data(), m.gmm.means[c].data() + m.gmm.means[c].size()));
      std::vector<double> flat;
      flat.reserve(m.gmm.covariances[c].size());
      for (int row = 0; row < m.gmm.covariances[c].rows(); ++row) {
        for (int col = 0; col < m.gmm.covariances[c].cols(); ++col) {
          flat.push_back(m.gmm.covariances[c](row, col));
        }
      }
      covs.push_back(flat);
    }
    pj["gmm"] = gj;
    arr.push_back(pj);
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<PrimitiveModel> read_model_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "lfd-model") {
    throw IoError(path.string() + " is not a model file");
  }
  std::vector<PrimitiveModel> models;
  for (const auto& pj : j.at("primitives")) {
    PrimitiveModel m;
    m.primitive = pj.at("primitive").get<int>();
    m.tool = tool_from_string(pj.at("tool").get<std::string>());
    m.frame = frame_name_from(pj.at("frame").get<std::string>());
    m.base_times = pj.at("base_times").get<std::vector<double>>();
    const auto& gj = pj.at("gmm");
    const int mc = gj.at("components").get<int>();
    const auto priors = gj.at("priors").get<std::vector<double>>();
    m.gmm.priors = Eigen::Map<const Eigen::VectorXd>(priors.data(), priors.size());
    for (int c = 0; c < mc; ++c) {
      const auto mean = gj.at("means").at(c).get<std::vector<double>>();
      m.gmm.means.emplace_back(
          Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size()));
      const auto flat = gj.at("covariances").at(c).get<std::vector<double>>();
      const int d = static_cast<int>(mean.size());
      Eigen::MatrixXd cov(d, d);
      for (int row = 0; row < d; ++row) {
        for (int col = 0; col < d; ++col) cov(row, col) = flat[row * d + col];
      }
      m.gmm.covariances.push_back(cov);
    }
    m.gmm.validate();
    models.push_back(std::move(m));
  }
  return models;
}

}  // namespace lfd
