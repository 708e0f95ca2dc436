#pragma once

#include "gaitlib/gait_model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gaitlib {

/// Waveform parameters for one joint slot, shared by both legs.
///
/// Over a left-stance step the stance-leg joint sweeps
///   offset + amplitude * (1/2 - phi(tau))
/// and the swing-leg joint sweeps
///   mirror_sign * offset + amplitude * (phi(tau) - 1/2) + lift * sin(pi tau)
/// with phi(tau) = (1 - cos(pi tau)) / 2. The amplitude is stride_gain * v_x
/// for sagittal joints and stride_gain * v_y for lateral ones; the lift is
/// lift + lift_gain * |v|. Lateral joints change sign under mirroring.
struct JointProfile {
  std::string name;
  bool lateral = false;
  double offset = 0.0;
  double stride_gain = 0.0;
  double lift = 0.0;
  double lift_gain = 0.0;
};

struct SyntheticSpec {
  std::string robot_name = "synthetic_biped";
  int n_l = 14;
  int n_e = 41;
  int degree = 7;
  int samples = 101;             // fit samples per gait
  double step_duration = 0.4;    // s at zero speed
  double duration_slope = -0.1;  // s per m/s of |v|
  double fit_tolerance = 1e-3;   // rad, max fit residual
  std::vector<JointProfile> joints;  // one per leg slot; n_outputs = 2 * joints.size()
  std::vector<Velocity> velocities;

  /// Ten outputs (five per leg) on a 13 x 3 grid over
  /// v_x in [-0.3, 0.5], v_y in [-0.2, 0.2]: 39 gaits.
  static SyntheticSpec defaults();

  /// Reads the JSON spec format documented in docs/formats.md; missing
  /// fields keep their defaults(). Throws SpecError.
  static SyntheticSpec parse_json(const std::string& text);

  int n_outputs() const { return 2 * static_cast<int>(joints.size()); }
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a sampled waveform cannot be fitted within fit_tolerance.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Legs swap (slot k <-> k + n/2); lateral slots flip sign.
MirrorMap synthetic_mirror(const SyntheticSpec& spec);

/// Exact waveform of the left-stance gait at v, before fitting.
Vector synthetic_pose(const SyntheticSpec& spec, Velocity v, double tau);

/// One gait fitted at the spec's degree.
Gait generate_gait(const SyntheticSpec& spec, Velocity v);

GaitLibrary generate_synthetic(const SyntheticSpec& spec);

}  // namespace gaitlib
