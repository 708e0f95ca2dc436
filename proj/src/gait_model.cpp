#include "gaitlib/gait_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace gaitlib {

namespace {

constexpr double kWeightTolerance = 1e-12;

double cross(Velocity a, Velocity b) { return a.x * b.y - a.y * b.x; }
double dot(Velocity a, Velocity b) { return a.x * b.x + a.y * b.y; }

// Twice the signed area of (a, b, c); positive when counter-clockwise.
double orient(Velocity a, Velocity b, Velocity c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Positive when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
double incircle(Velocity a, Velocity b, Velocity c, Velocity d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  return (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) +
         (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy) +
         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
}

std::string describe(const Gait& g, std::size_t index) {
  std::ostringstream out;
  out << "gait " << index;
  if (!g.name.empty()) out << " '" << g.name << "'";
  out << " at (" << g.velocity.x << ", " << g.velocity.y << ")";
  return out.str();
}

void clamp_and_normalise(Blend& blend) {
  double sum = 0.0;
  for (int k = 0; k < blend.count; ++k) {
    blend.weights[k] = std::max(blend.weights[k], 0.0);
    sum += blend.weights[k];
  }
  for (int k = 0; k < blend.count; ++k) blend.weights[k] /= sum;
}

// Closest point of segment [a, b] to v as a two-node blend.
Blend segment_blend(int ia, int ib, Velocity a, Velocity b, Velocity v) {
  const Velocity d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(v - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  Blend blend;
  blend.nodes = {ia, ib, ib};
  blend.weights = {1.0 - t, t, 0.0};
  blend.count = 2;
  blend.point = {a.x + t * d.x, a.y + t * d.y};
  return blend;
}

double squared_distance(Velocity a, Velocity b) {
  const Velocity d = a - b;
  return dot(d, d);
}

}  // namespace

double norm(Velocity v) { return std::hypot(v.x, v.y); }

const char* to_string(Stance s) { return s == Stance::Left ? "L" : "R"; }

const char* to_string(LibraryError::Kind kind) {
  switch (kind) {
    case LibraryError::Kind::Io: return "io";
    case LibraryError::Kind::Schema: return "schema";
    case LibraryError::Kind::Dimension: return "dimension";
    case LibraryError::Kind::DuplicateVelocity: return "duplicate_velocity";
    case LibraryError::Kind::MirrorMap: return "mirror_map";
    case LibraryError::Kind::InvalidGait: return "invalid_gait";
    case LibraryError::Kind::Empty: return "empty";
  }
  return "unknown";
}

MirrorMap MirrorMap::identity(int n_outputs) {
  MirrorMap map;
  map.permutation.resize(static_cast<std::size_t>(n_outputs));
  std::iota(map.permutation.begin(), map.permutation.end(), 0);
  map.signs.assign(static_cast<std::size_t>(n_outputs), 1.0);
  return map;
}

void MirrorMap::validate(int n_outputs) const {
  const auto fail = [](const std::string& msg) {
    throw LibraryError(LibraryError::Kind::MirrorMap, "mirror map: " + msg);
  };
  if (static_cast<int>(permutation.size()) != n_outputs || static_cast<int>(signs.size()) != n_outputs) {
    std::ostringstream msg;
    msg << "expected " << n_outputs << " entries, got permutation " << permutation.size() << " and signs "
        << signs.size();
    fail(msg.str());
  }
  std::vector<bool> seen(permutation.size(), false);
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const int p = permutation[i];
    if (p < 0 || p >= n_outputs || seen[static_cast<std::size_t>(p)]) {
      fail("permutation is not a bijection at index " + std::to_string(i));
    }
    seen[static_cast<std::size_t>(p)] = true;
    if (signs[i] != 1.0 && signs[i] != -1.0) fail("sign at index " + std::to_string(i) + " is not +1 or -1");
  }
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const auto p = static_cast<std::size_t>(permutation[i]);
    if (permutation[p] != static_cast<int>(i)) {
      fail("permutation is not an involution at index " + std::to_string(i));
    }
    if (signs[i] * signs[p] != 1.0) {
      fail("signs are inconsistent with the permutation at index " + std::to_string(i));
    }
  }
}

Matrix MirrorMap::apply(const Matrix& rows) const {
  if (rows.rows() != size()) throw std::invalid_argument("mirror map size does not match row count");
  Matrix out(rows.rows(), rows.cols());
  for (int i = 0; i < size(); ++i) out.row(i) = signs[i] * rows.row(permutation[i]);
  return out;
}

Vector MirrorMap::apply(const Vector& values) const {
  if (values.size() != size()) throw std::invalid_argument("mirror map size does not match vector size");
  Vector out(values.size());
  for (int i = 0; i < size(); ++i) out(i) = signs[i] * values(permutation[i]);
  return out;
}

Gait mirror(const Gait& gait, const MirrorMap& map) {
  Gait out = gait;
  out.curve = BezierCurve(map.apply(gait.curve.coeffs()));
  out.stance = opposite(gait.stance);
  out.velocity = reflect_lateral(gait.velocity);
  return out;
}

GaitLibrary GaitLibrary::build(std::vector<Gait> gaits, MirrorMap mirror, LibraryMetadata metadata) {
  using Kind = LibraryError::Kind;
  if (gaits.empty()) throw LibraryError(Kind::Empty, "gait library has no gaits");

  const int n_outputs = gaits.front().curve.rows();
  const int degree = gaits.front().curve.degree();
  if (n_outputs < 1) throw LibraryError(Kind::Dimension, describe(gaits.front(), 0) + " has no curve");

  for (std::size_t i = 0; i < gaits.size(); ++i) {
    const Gait& g = gaits[i];
    if (g.curve.rows() != n_outputs || g.curve.degree() != degree) {
      std::ostringstream msg;
      msg << describe(g, i) << ": curve is " << g.curve.rows() << "x" << g.curve.degree() + 1 << ", expected "
          << n_outputs << "x" << degree + 1;
      throw LibraryError(Kind::Dimension, msg.str());
    }
    if (!(std::isfinite(g.step_duration) && g.step_duration > 0.0)) {
      throw LibraryError(Kind::InvalidGait, describe(g, i) + ": step_duration must be positive and finite");
    }
    if (!(std::isfinite(g.velocity.x) && std::isfinite(g.velocity.y))) {
      throw LibraryError(Kind::InvalidGait, describe(g, i) + ": velocity must be finite");
    }
    if (g.stance != Stance::Left) {
      throw LibraryError(Kind::InvalidGait, describe(g, i) + ": library gaits must be canonical left stance");
    }
  }
  for (std::size_t i = 0; i < gaits.size(); ++i) {
    for (std::size_t j = i + 1; j < gaits.size(); ++j) {
      if (gaits[i].velocity == gaits[j].velocity) {
        throw LibraryError(Kind::DuplicateVelocity,
                           "duplicate velocity: " + describe(gaits[i], i) + " and " + describe(gaits[j], j));
      }
    }
  }
  mirror.validate(n_outputs);

  GaitLibrary lib;
  lib.gaits_ = std::move(gaits);
  lib.mirror_ = std::move(mirror);
  lib.metadata_ = std::move(metadata);
  lib.n_outputs_ = n_outputs;
  lib.degree_ = degree;

  if (lib.gaits_.size() == 1) {
    lib.kind_ = IndexKind::Single;
    lib.hull_ = {0};
    lib.warnings_.push_back("single gait: every query returns the same gait");
    return lib;
  }

  // Collinear unless some node is off the line through the lexicographic
  // minimum and the node farthest from it.
  const auto& g = lib.gaits_;
  std::size_t origin = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const Velocity a = g[i].velocity, b = g[origin].velocity;
    if (a.x < b.x || (a.x == b.x && a.y < b.y)) origin = i;
  }
  std::size_t far = origin;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (squared_distance(g[i].velocity, g[origin].velocity) >
        squared_distance(g[far].velocity, g[origin].velocity)) {
      far = i;
    }
  }
  const Velocity axis = g[far].velocity - g[origin].velocity;
  const double axis_len = norm(axis);
  bool collinear = true;
  for (const Gait& gait : g) {
    const double offset = std::abs(cross(axis, gait.velocity - g[origin].velocity)) / axis_len;
    if (offset > 1e-9 * axis_len) {
      collinear = false;
      break;
    }
  }

  if (collinear) {
    lib.build_segment_index();
  } else {
    lib.build_triangulation();
  }
  return lib;
}

void GaitLibrary::build_segment_index() {
  kind_ = IndexKind::Segment;
  warnings_.push_back("collinear velocities: interpolation is one-dimensional along a line");

  // Extremes along the line: lexicographic min and the node farthest from it.
  std::vector<int> order(gaits_.size());
  std::iota(order.begin(), order.end(), 0);
  const auto lex_less = [this](int a, int b) {
    const Velocity va = gaits_[a].velocity, vb = gaits_[b].velocity;
    return va.x < vb.x || (va.x == vb.x && va.y < vb.y);
  };
  const int first = *std::min_element(order.begin(), order.end(), lex_less);
  const Velocity origin = gaits_[first].velocity;
  int last = first;
  for (int i : order) {
    if (squared_distance(gaits_[i].velocity, origin) > squared_distance(gaits_[last].velocity, origin)) last = i;
  }
  const Velocity axis = gaits_[last].velocity - origin;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dot(gaits_[a].velocity - origin, axis) < dot(gaits_[b].velocity - origin, axis);
  });
  segment_order_ = std::move(order);
  hull_ = {segment_order_.front(), segment_order_.back()};
}

void GaitLibrary::build_triangulation() {
  kind_ = IndexKind::Triangulated;
  const int n = size();
  std::vector<Velocity> pts(gaits_.size());
  double min_x = gaits_[0].velocity.x, max_x = min_x, min_y = gaits_[0].velocity.y, max_y = min_y;
  for (int i = 0; i < n; ++i) {
    pts[i] = gaits_[i].velocity;
    min_x = std::min(min_x, pts[i].x);
    max_x = std::max(max_x, pts[i].x);
    min_y = std::min(min_y, pts[i].y);
    max_y = std::max(max_y, pts[i].y);
  }
  const double scale = std::max(max_x - min_x, max_y - min_y);
  const double orient_eps = 1e-12 * scale * scale;
  const double incircle_eps = 1e-12 * scale * scale * scale * scale;
  const auto area = [&](int a, int b, int c) { return orient(pts[a], pts[b], pts[c]); };

  // Sweep in lexicographic order; every new point lies outside the current hull.
  std::vector<int> order(gaits_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  });

  std::size_t m = 2;
  while (m < order.size() && std::abs(area(order[0], order[1], order[m])) <= orient_eps) ++m;
  // The collinearity check in build() guarantees m < n here.

  std::vector<Triangle> tris;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    Triangle t{order[i], order[i + 1], order[m]};
    if (area(t[0], t[1], t[2]) < 0.0) std::swap(t[0], t[1]);
    tris.push_back(t);
  }
  std::vector<int> hull;
  if (area(order[0], order[1], order[m]) > 0.0) {
    for (std::size_t i = 0; i <= m; ++i) hull.push_back(order[i]);
  } else {
    hull.push_back(order[0]);
    hull.push_back(order[m]);
    for (std::size_t i = m - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  for (std::size_t k = m + 1; k < order.size(); ++k) {
    const int p = order[k];
    const std::size_t h = hull.size();
    std::vector<bool> visible(h);
    for (std::size_t i = 0; i < h; ++i) visible[i] = area(hull[i], hull[(i + 1) % h], p) < -orient_eps;

    std::size_t start = h;
    for (std::size_t i = 0; i < h; ++i) {
      if (visible[i] && !visible[(i + h - 1) % h]) {
        start = i;
        break;
      }
    }
    if (start == h) throw std::logic_error("triangulation sweep found no visible hull edge");

    std::size_t count = 0;
    while (visible[(start + count) % h]) {
      const int a = hull[(start + count) % h];
      const int b = hull[(start + count + 1) % h];
      tris.push_back({b, a, p});
      ++count;
    }
    // Replace the interior vertices of the visible chain with p.
    std::vector<int> next;
    next.reserve(h + 1);
    for (std::size_t i = 0; i <= h - count; ++i) {
      next.push_back(hull[(start + count + i) % h]);
    }
    next.push_back(p);
    hull = std::move(next);
  }

  // Lawson flips until every interior edge is locally Delaunay.
  for (int guard = 0;; ++guard) {
    if (guard > 100000) throw std::logic_error("edge flipping did not converge");
    std::map<std::pair<int, int>, std::pair<std::size_t, int>> owner;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int e = 0; e < 3; ++e) owner[{tris[t][e], tris[t][(e + 1) % 3]}] = {t, tris[t][(e + 2) % 3]};
    }
    bool flipped = false;
    for (std::size_t t = 0; t < tris.size() && !flipped; ++t) {
      for (int e = 0; e < 3 && !flipped; ++e) {
        const int a = tris[t][e], b = tris[t][(e + 1) % 3], c = tris[t][(e + 2) % 3];
        const auto it = owner.find({b, a});
        if (it == owner.end() || it->second.first < t) continue;
        const auto [u, d] = it->second;
        if (incircle(pts[a], pts[b], pts[c], pts[d]) > incircle_eps && area(a, d, c) > orient_eps &&
            area(b, c, d) > orient_eps) {
          tris[t] = {a, d, c};
          tris[u] = {b, c, d};
          flipped = true;
        }
      }
    }
    if (!flipped) break;
  }

  triangles_ = std::move(tris);
  hull_ = std::move(hull);
}

Blend GaitLibrary::triangle_weights(int triangle, Velocity v) const {
  const Triangle& t = triangles_.at(static_cast<std::size_t>(triangle));
  const Velocity a = gaits_[t[0]].velocity, b = gaits_[t[1]].velocity, c = gaits_[t[2]].velocity;
  const double denom = orient(a, b, c);
  Blend blend;
  blend.nodes = t;
  blend.count = 3;
  blend.weights = {orient(v, b, c) / denom, orient(a, v, c) / denom, orient(a, b, v) / denom};
  blend.point = v;
  return blend;
}

Blend GaitLibrary::locate_in_triangles(Velocity v) const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    Blend blend = triangle_weights(static_cast<int>(t), v);
    if (*std::min_element(blend.weights.begin(), blend.weights.end()) >= -kWeightTolerance) {
      clamp_and_normalise(blend);
      return blend;
    }
  }
  return project_onto_boundary(v);
}

Blend GaitLibrary::project_onto_boundary(Velocity v) const {
  Blend best;
  double best_d2 = std::numeric_limits<double>::infinity();
  const std::size_t h = hull_.size();
  for (std::size_t i = 0; i < h; ++i) {
    const int ia = hull_[i], ib = hull_[(i + 1) % h];
    const Blend candidate = segment_blend(ia, ib, gaits_[ia].velocity, gaits_[ib].velocity, v);
    const double d2 = squared_distance(candidate.point, v);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = candidate;
    }
  }
  return best;
}

Blend GaitLibrary::locate_nearest_three(Velocity v) const {
  std::vector<int> order(gaits_.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 3, order.end(), [&](int a, int b) {
    const double da = squared_distance(gaits_[a].velocity, v), db = squared_distance(gaits_[b].velocity, v);
    return da < db || (da == db && a < b);
  });
  std::array<int, 3> nodes{order[0], order[1], order[2]};
  Velocity a = gaits_[nodes[0]].velocity, b = gaits_[nodes[1]].velocity, c = gaits_[nodes[2]].velocity;
  const double scale2 = std::max({squared_distance(a, b), squared_distance(b, c), squared_distance(a, c)});
  if (std::abs(orient(a, b, c)) <= 1e-12 * scale2) return locate_in_triangles(v);
  if (orient(a, b, c) < 0.0) {
    std::swap(nodes[1], nodes[2]);
    std::swap(b, c);
  }

  const double denom = orient(a, b, c);
  Blend blend;
  blend.nodes = nodes;
  blend.count = 3;
  blend.weights = {orient(v, b, c) / denom, orient(a, v, c) / denom, orient(a, b, v) / denom};
  blend.point = v;
  if (*std::min_element(blend.weights.begin(), blend.weights.end()) >= -kWeightTolerance) {
    clamp_and_normalise(blend);
    return blend;
  }
  // Query outside the three nodes' triangle: use its closest boundary point.
  Blend best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int e = 0; e < 3; ++e) {
    const int ia = nodes[e], ib = nodes[(e + 1) % 3];
    const Blend candidate = segment_blend(ia, ib, gaits_[ia].velocity, gaits_[ib].velocity, v);
    const double d2 = squared_distance(candidate.point, v);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = candidate;
    }
  }
  return best;
}

Blend GaitLibrary::locate(Velocity v, InterpolationMode mode) const {
  if (!(std::isfinite(v.x) && std::isfinite(v.y))) throw std::invalid_argument("query velocity is not finite");
  switch (kind_) {
    case IndexKind::Single: {
      Blend blend;
      blend.nodes = {0, 0, 0};
      blend.point = gaits_[0].velocity;
      return blend;
    }
    case IndexKind::Segment: {
      const Velocity origin = gaits_[segment_order_.front()].velocity;
      const Velocity axis = gaits_[segment_order_.back()].velocity - origin;
      const double len2 = dot(axis, axis);
      const auto param = [&](Velocity p) { return dot(p - origin, axis) / len2; };
      const double t = std::clamp(param(v), 0.0, 1.0);
      for (std::size_t i = 0; i + 1 < segment_order_.size(); ++i) {
        const int ia = segment_order_[i], ib = segment_order_[i + 1];
        const double ta = param(gaits_[ia].velocity), tb = param(gaits_[ib].velocity);
        if (t <= tb || i + 2 == segment_order_.size()) {
          const double lambda = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
          const Velocity a = gaits_[ia].velocity, b = gaits_[ib].velocity;
          Blend blend;
          blend.nodes = {ia, ib, ib};
          blend.weights = {1.0 - lambda, lambda, 0.0};
          blend.count = 2;
          blend.point = {a.x + lambda * (b.x - a.x), a.y + lambda * (b.y - a.y)};
          return blend;
        }
      }
      break;
    }
    case IndexKind::Triangulated:
      return mode == InterpolationMode::NearestThree ? locate_nearest_three(v) : locate_in_triangles(v);
  }
  throw std::logic_error("unreachable library index state");
}

Velocity GaitLibrary::project_to_hull(Velocity v) const { return locate(v).point; }

Gait GaitLibrary::combine(const Blend& blend) const {
  const Gait& first = gaits_[blend.nodes[0]];
  Matrix coeffs = blend.weights[0] * first.curve.coeffs();
  double duration = blend.weights[0] * first.step_duration;
  for (int k = 1; k < blend.count; ++k) {
    const Gait& g = gaits_[blend.nodes[k]];
    coeffs.noalias() += blend.weights[k] * g.curve.coeffs();
    duration += blend.weights[k] * g.step_duration;
  }

  Gait out;
  out.curve = BezierCurve(std::move(coeffs));
  out.velocity = blend.point;
  out.step_duration = duration;
  out.stance = Stance::Left;
  const auto whole = std::find(blend.weights.begin(), blend.weights.begin() + blend.count, 1.0);
  if (whole != blend.weights.begin() + blend.count) {
    out.name = gaits_[blend.nodes[static_cast<std::size_t>(whole - blend.weights.begin())]].name;
  } else {
    std::ostringstream name;
    name << "blend(" << blend.point.x << "," << blend.point.y << ")";
    out.name = name.str();
  }
  return out;
}

Gait GaitLibrary::interpolate(Velocity v, InterpolationMode mode) const { return combine(locate(v, mode)); }

}  // namespace gaitlib
