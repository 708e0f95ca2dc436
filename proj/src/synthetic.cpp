#include "gaitlib/synthetic.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

namespace gaitlib {

namespace {

using json = nlohmann::json;

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 && count > 1 ? hi : lo + (hi - lo) * i / std::max(count - 1, 1));
  }
  return out;
}

std::vector<Velocity> grid(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<Velocity> out;
  for (double x : xs) {
    for (double y : ys) out.push_back({x, y});
  }
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw SpecError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!it->is_number_integer()) throw SpecError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw SpecError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw SpecError(where + ": field '" + key + "' has the wrong type");
  }
}

std::vector<double> read_axis(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_object()) throw SpecError(std::string("grid: missing axis '") + key + "'");
  check_keys(*it, {"min", "max", "count"}, std::string("grid.") + key);
  double lo = 0.0, hi = 0.0;
  int count = 0;
  read_field(*it, "min", lo, key);
  read_field(*it, "max", hi, key);
  read_field(*it, "count", count, key);
  if (count < 1 || !(hi >= lo)) throw SpecError(std::string("grid.") + key + ": need count >= 1 and max >= min");
  return linspace(lo, hi, count);
}

std::string gait_name(Velocity v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "vx%+.4f_vy%+.4f", v.x, v.y);
  return buf;
}

}  // namespace

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec spec;
  spec.joints = {
      {"hip_yaw", true, 0.0, 0.1, 0.0, 0.0},
      {"hip_roll", true, 0.05, 0.8, 0.0, 0.0},
      {"hip_pitch", false, 0.3, 1.0, 0.25, 0.2},
      {"knee", false, -0.7, 0.2, -0.5, -0.3},
      {"ankle_pitch", false, 0.4, -0.8, 0.25, 0.1},
  };
  spec.velocities = grid(linspace(-0.3, 0.5, 13), linspace(-0.2, 0.2, 3));
  return spec;
}

SyntheticSpec SyntheticSpec::parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("spec must be a JSON object");
  check_keys(doc,
             {"robot_name", "n_l", "n_e", "degree", "samples", "step_duration", "duration_slope", "fit_tolerance",
              "joints", "grid", "velocities"},
             "spec");

  SyntheticSpec spec = defaults();
  read_field(doc, "robot_name", spec.robot_name, "spec");
  read_field(doc, "n_l", spec.n_l, "spec");
  read_field(doc, "n_e", spec.n_e, "spec");
  read_field(doc, "degree", spec.degree, "spec");
  read_field(doc, "samples", spec.samples, "spec");
  read_field(doc, "step_duration", spec.step_duration, "spec");
  read_field(doc, "duration_slope", spec.duration_slope, "spec");
  read_field(doc, "fit_tolerance", spec.fit_tolerance, "spec");

  if (const auto it = doc.find("joints"); it != doc.end()) {
    if (!it->is_array() || it->empty()) throw SpecError("spec: 'joints' must be a non-empty array");
    spec.joints.clear();
    for (const json& j : *it) {
      if (!j.is_object()) throw SpecError("spec: joint entries must be objects");
      check_keys(j, {"name", "lateral", "offset", "stride_gain", "lift", "lift_gain"}, "joint");
      JointProfile p;
      read_field(j, "name", p.name, "joint");
      read_field(j, "lateral", p.lateral, "joint");
      read_field(j, "offset", p.offset, "joint");
      read_field(j, "stride_gain", p.stride_gain, "joint");
      read_field(j, "lift", p.lift, "joint");
      read_field(j, "lift_gain", p.lift_gain, "joint");
      spec.joints.push_back(std::move(p));
    }
  }

  const bool has_grid = doc.contains("grid");
  const bool has_points = doc.contains("velocities");
  if (has_grid && has_points) throw SpecError("spec: give either 'grid' or 'velocities', not both");
  if (has_grid) {
    const json& g = doc["grid"];
    if (!g.is_object()) throw SpecError("spec: 'grid' must be an object");
    check_keys(g, {"v_x", "v_y"}, "grid");
    spec.velocities = grid(read_axis(g, "v_x"), read_axis(g, "v_y"));
  } else if (has_points) {
    const json& pts = doc["velocities"];
    if (!pts.is_array() || pts.empty()) throw SpecError("spec: 'velocities' must be a non-empty array");
    spec.velocities.clear();
    for (const json& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw SpecError("spec: each velocity must be [v_x, v_y]");
      }
      spec.velocities.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }

  if (spec.degree < 1 || spec.degree > kMaxDegree) throw SpecError("spec: degree out of range");
  if (spec.samples < spec.degree + 1) throw SpecError("spec: need samples >= degree + 1");
  if (!(spec.step_duration > 0.0)) throw SpecError("spec: step_duration must be > 0");
  if (!(spec.fit_tolerance > 0.0)) throw SpecError("spec: fit_tolerance must be > 0");
  return spec;
}

MirrorMap synthetic_mirror(const SyntheticSpec& spec) {
  const int half = static_cast<int>(spec.joints.size());
  MirrorMap map;
  map.permutation.resize(static_cast<std::size_t>(2 * half));
  map.signs.resize(static_cast<std::size_t>(2 * half));
  for (int k = 0; k < half; ++k) {
    const double sign = spec.joints[static_cast<std::size_t>(k)].lateral ? -1.0 : 1.0;
    map.permutation[static_cast<std::size_t>(k)] = k + half;
    map.permutation[static_cast<std::size_t>(k + half)] = k;
    map.signs[static_cast<std::size_t>(k)] = sign;
    map.signs[static_cast<std::size_t>(k + half)] = sign;
  }
  return map;
}

Vector synthetic_pose(const SyntheticSpec& spec, Velocity v, double tau) {
  const int half = static_cast<int>(spec.joints.size());
  const double sweep = 0.5 * (1.0 - std::cos(std::numbers::pi * tau));
  const double bump = std::sin(std::numbers::pi * tau);
  const double speed = norm(v);
  Vector pose(2 * half);
  for (int k = 0; k < half; ++k) {
    const JointProfile& p = spec.joints[static_cast<std::size_t>(k)];
    const double amplitude = p.stride_gain * (p.lateral ? v.y : v.x);
    const double mirror_sign = p.lateral ? -1.0 : 1.0;
    pose(k) = p.offset + amplitude * (0.5 - sweep);
    pose(k + half) = mirror_sign * p.offset + amplitude * (sweep - 0.5) + (p.lift + p.lift_gain * speed) * bump;
  }
  return pose;
}

Gait generate_gait(const SyntheticSpec& spec, Velocity v) {
  std::vector<FitSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.samples));
  for (int i = 0; i < spec.samples; ++i) {
    const double tau = static_cast<double>(i) / (spec.samples - 1);
    samples.push_back({tau, synthetic_pose(spec, v, tau)});
  }

  Gait gait;
  gait.curve = fit_least_squares(samples, spec.degree);
  gait.velocity = v;
  gait.step_duration = spec.step_duration + spec.duration_slope * norm(v);
  gait.stance = Stance::Left;
  gait.name = gait_name(v);

  double residual = 0.0;
  for (const FitSample& s : samples) {
    residual = std::max(residual, (gait.curve.eval(s.tau) - s.value).cwiseAbs().maxCoeff());
  }
  if (residual > spec.fit_tolerance) {
    std::ostringstream msg;
    msg << "gait " << gait.name << ": fit residual " << residual << " rad exceeds tolerance " << spec.fit_tolerance;
    throw GenerationError(msg.str(), residual);
  }
  if (!(gait.step_duration > 0.0)) {
    throw GenerationError("gait " + gait.name + ": step duration is not positive", 0.0);
  }
  return gait;
}

GaitLibrary generate_synthetic(const SyntheticSpec& spec) {
  if (spec.joints.empty()) throw SpecError("spec has no joints");
  if (spec.velocities.empty()) throw SpecError("spec has no velocities");
  std::vector<Gait> gaits;
  gaits.reserve(spec.velocities.size());
  for (const Velocity& v : spec.velocities) gaits.push_back(generate_gait(spec, v));

  LibraryMetadata meta;
  meta.robot_name = spec.robot_name;
  meta.n_l = spec.n_l;
  meta.n_e = spec.n_e;
  json names = json::array();
  for (const char* side : {"l_", "r_"}) {
    for (const JointProfile& p : spec.joints) names.push_back(std::string(side) + p.name);
  }
  meta.extra["joint_names"] = names.dump();
  meta.extra["generator"] = json("synthetic").dump();
  return GaitLibrary::build(std::move(gaits), synthetic_mirror(spec), std::move(meta));
}

}  // namespace gaitlib
