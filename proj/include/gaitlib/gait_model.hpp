#pragma once

#include "gaitlib/bezier.hpp"

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitlib {

/// Planar base velocity (m/s): x forward, y lateral (left positive).
struct Velocity {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Velocity&, const Velocity&) = default;
  friend Velocity operator+(Velocity a, Velocity b) { return {a.x + b.x, a.y + b.y}; }
  friend Velocity operator-(Velocity a, Velocity b) { return {a.x - b.x, a.y - b.y}; }
};

double norm(Velocity v);

/// Reflects a velocity across the sagittal plane.
inline Velocity reflect_lateral(Velocity v) { return {v.x, -v.y}; }

enum class Stance { Left, Right };

inline Stance opposite(Stance s) { return s == Stance::Left ? Stance::Right : Stance::Left; }
const char* to_string(Stance s);

/// Left/right symmetry on output indices: mirrored row i = signs[i] * row permutation[i].
struct MirrorMap {
  std::vector<int> permutation;
  std::vector<double> signs;

  static MirrorMap identity(int n_outputs);

  int size() const { return static_cast<int>(permutation.size()); }

  /// Throws LibraryError(MirrorMap) unless the map is an involution on n_outputs rows.
  void validate(int n_outputs) const;

  Matrix apply(const Matrix& rows) const;
  Vector apply(const Vector& values) const;
};

/// One step of a periodic walking motion.
struct Gait {
  BezierCurve curve;
  Velocity velocity;
  double step_duration = 0.0;  // seconds
  Stance stance = Stance::Left;
  std::string name;
};

/// Swaps stance, reflects the lateral velocity and permutes/negates rows.
Gait mirror(const Gait& gait, const MirrorMap& map);

struct LibraryMetadata {
  int n_l = 0;
  int n_e = 0;
  std::string robot_name;
  int format_version = 1;
  /// Additional free-form fields, each kept as its serialized JSON text.
  std::map<std::string, std::string> extra;
};

class LibraryError : public std::runtime_error {
 public:
  enum class Kind { Io, Schema, Dimension, DuplicateVelocity, MirrorMap, InvalidGait, Empty };

  LibraryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(LibraryError::Kind kind);

enum class IndexKind {
  Single,        // one gait
  Segment,       // collinear velocities: piecewise-linear along a line
  Triangulated,  // Delaunay triangulation of the velocity points
};

enum class InterpolationMode {
  ContainingSimplex,  // barycentric weights of the Delaunay triangle holding the query
  NearestThree,       // the three closest nodes, query clamped into their triangle
};

/// Convex weights over at most three library nodes.
struct Blend {
  std::array<int, 3> nodes{0, 0, 0};
  std::array<double, 3> weights{1.0, 0.0, 0.0};
  int count = 1;
  Velocity point;  // where the weights reproduce the node velocities
};

/// Immutable, validated set of canonical (left stance) gaits indexed by velocity.
class GaitLibrary {
 public:
  using Triangle = std::array<int, 3>;

  /// Validates the gaits and builds the velocity index. Throws LibraryError.
  static GaitLibrary build(std::vector<Gait> gaits, MirrorMap mirror, LibraryMetadata metadata = {});

  const std::vector<Gait>& gaits() const { return gaits_; }
  const Gait& gait(int i) const { return gaits_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(gaits_.size()); }
  const MirrorMap& mirror_map() const { return mirror_; }
  const LibraryMetadata& metadata() const { return metadata_; }
  int n_outputs() const { return n_outputs_; }
  int degree() const { return degree_; }

  IndexKind index_kind() const { return kind_; }
  /// Counter-clockwise triangles (Triangulated libraries only).
  const std::vector<Triangle>& triangles() const { return triangles_; }
  /// Boundary of the velocity hull, counter-clockwise for Triangulated
  /// libraries, the two extreme nodes for Segment libraries.
  const std::vector<int>& hull() const { return hull_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Nearest point of the velocity hull; identity for points inside it.
  Velocity project_to_hull(Velocity v) const;

  /// Weights for v, after projecting it onto the hull when outside.
  Blend locate(Velocity v, InterpolationMode mode = InterpolationMode::ContainingSimplex) const;

  /// Barycentric weights of v in one triangle, without clamping.
  Blend triangle_weights(int triangle, Velocity v) const;

  /// Combination of node gaits with the given weights (coefficients and step duration).
  Gait combine(const Blend& blend) const;

  Gait interpolate(Velocity v, InterpolationMode mode = InterpolationMode::ContainingSimplex) const;

 private:
  GaitLibrary() = default;

  void build_segment_index();
  void build_triangulation();
  Blend locate_in_triangles(Velocity v) const;
  Blend project_onto_boundary(Velocity v) const;
  Blend locate_nearest_three(Velocity v) const;

  std::vector<Gait> gaits_;
  MirrorMap mirror_;
  LibraryMetadata metadata_;
  int n_outputs_ = 0;
  int degree_ = 0;

  IndexKind kind_ = IndexKind::Single;
  std::vector<Triangle> triangles_;
  std::vector<int> hull_;
  std::vector<int> segment_order_;  // Segment: nodes sorted along the line
  std::vector<std::string> warnings_;
};

}  // namespace gaitlib
