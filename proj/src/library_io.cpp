#include "gaitlib/library_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gaitlib {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using Kind = LibraryError::Kind;

[[noreturn]] void schema_error(const std::string& what) { throw LibraryError(Kind::Schema, what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + ": missing field '" + key + "'");
  return *it;
}

double number_field(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) schema_error(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int integer_field(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

std::string gait_label(const GaitRecord& g, std::size_t index) {
  return "gait " + std::to_string(index) + (g.name.empty() ? "" : " '" + g.name + "'");
}

Gait record_to_gait(const GaitRecord& record, std::size_t index, int n_outputs, int degree) {
  const std::size_t cols = static_cast<std::size_t>(degree) + 1;
  if (record.coeffs.size() != static_cast<std::size_t>(n_outputs) * cols) {
    std::ostringstream msg;
    msg << gait_label(record, index) << ": field 'coeffs' has " << record.coeffs.size() << " entries, expected "
        << n_outputs << "x" << cols;
    throw LibraryError(Kind::Dimension, msg.str());
  }
  Matrix coeffs(n_outputs, static_cast<Eigen::Index>(cols));
  for (int r = 0; r < n_outputs; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      coeffs(r, static_cast<Eigen::Index>(c)) = record.coeffs[static_cast<std::size_t>(r) * cols + c];
    }
  }
  Gait gait;
  try {
    gait.curve = BezierCurve(std::move(coeffs));
  } catch (const std::invalid_argument& e) {
    throw LibraryError(Kind::InvalidGait, gait_label(record, index) + ": field 'coeffs': " + e.what());
  }
  gait.velocity = {record.v_x, record.v_y};
  gait.step_duration = record.step_duration;
  gait.stance = Stance::Left;
  gait.name = record.name;
  return gait;
}

double triangle_area(Velocity a, Velocity b, Velocity c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double min_angle_deg(Velocity a, Velocity b, Velocity c) {
  const auto angle = [](Velocity p, Velocity q, Velocity r) {
    const Velocity u = q - p, w = r - p;
    return std::atan2(std::abs(u.x * w.y - u.y * w.x), u.x * w.x + u.y * w.y);
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)}) * 180.0 / std::numbers::pi;
}

}  // namespace

LibraryFile parse_library(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("library is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("library document must be a JSON object");

  LibraryFile file;
  file.format_version = integer_field(doc, "format_version", "library");
  file.n_outputs = integer_field(doc, "n_outputs", "library");
  file.degree = integer_field(doc, "degree", "library");

  const json& mirror = require(doc, "mirror", "library");
  if (!mirror.is_object()) schema_error("library: field 'mirror' must be an object");
  const json& perm = require(mirror, "permutation", "mirror");
  const json& signs = require(mirror, "signs", "mirror");
  if (!perm.is_array() || !signs.is_array()) schema_error("mirror: permutation and signs must be arrays");
  for (const json& p : perm) {
    if (!p.is_number_integer()) schema_error("mirror: permutation entries must be integers");
    file.mirror.permutation.push_back(p.get<int>());
  }
  for (const json& s : signs) {
    if (!s.is_number()) schema_error("mirror: sign entries must be numbers");
    file.mirror.signs.push_back(s.get<double>());
  }

  const json& gaits = require(doc, "gaits", "library");
  if (!gaits.is_array()) schema_error("library: field 'gaits' must be an array");
  for (std::size_t i = 0; i < gaits.size(); ++i) {
    const json& g = gaits[i];
    const std::string where = "gait " + std::to_string(i);
    if (!g.is_object()) schema_error(where + " must be an object");
    GaitRecord record;
    if (const auto name = g.find("name"); name != g.end()) {
      if (!name->is_string()) schema_error(where + ": field 'name' must be a string");
      record.name = name->get<std::string>();
    }
    const std::string label = record.name.empty() ? where : where + " '" + record.name + "'";
    record.v_x = number_field(g, "v_x", label);
    record.v_y = number_field(g, "v_y", label);
    record.step_duration = number_field(g, "step_duration", label);
    const json& coeffs = require(g, "coeffs", label);
    if (!coeffs.is_array()) schema_error(label + ": field 'coeffs' must be an array");
    record.coeffs.reserve(coeffs.size());
    for (const json& c : coeffs) {
      if (!c.is_number()) schema_error(label + ": field 'coeffs' must hold numbers");
      record.coeffs.push_back(c.get<double>());
    }
    file.gaits.push_back(std::move(record));
  }

  if (const auto meta = doc.find("metadata"); meta != doc.end()) {
    if (!meta->is_object()) schema_error("library: field 'metadata' must be an object");
    for (const auto& [key, value] : meta->items()) {
      if (key == "n_l") {
        if (!value.is_number_integer()) schema_error("metadata: field 'n_l' must be an integer");
        file.metadata.n_l = value.get<int>();
      } else if (key == "n_e") {
        if (!value.is_number_integer()) schema_error("metadata: field 'n_e' must be an integer");
        file.metadata.n_e = value.get<int>();
      } else if (key == "robot_name") {
        if (!value.is_string()) schema_error("metadata: field 'robot_name' must be a string");
        file.metadata.robot_name = value.get<std::string>();
      } else {
        file.metadata.extra[key] = value.dump();
      }
    }
  }
  file.metadata.format_version = file.format_version;
  return file;
}

std::string serialize_library(const LibraryFile& file) {
  ordered_json doc;
  doc["format_version"] = file.format_version;
  doc["n_outputs"] = file.n_outputs;
  doc["degree"] = file.degree;
  doc["mirror"] = {{"permutation", file.mirror.permutation}, {"signs", file.mirror.signs}};

  ordered_json meta = ordered_json::object();
  meta["robot_name"] = file.metadata.robot_name;
  meta["n_l"] = file.metadata.n_l;
  meta["n_e"] = file.metadata.n_e;
  for (const auto& [key, text] : file.metadata.extra) meta[key] = ordered_json::parse(text);
  doc["metadata"] = std::move(meta);

  ordered_json gaits = ordered_json::array();
  for (const GaitRecord& g : file.gaits) {
    gaits.push_back({{"name", g.name},
                     {"v_x", g.v_x},
                     {"v_y", g.v_y},
                     {"step_duration", g.step_duration},
                     {"coeffs", g.coeffs}});
  }
  doc["gaits"] = std::move(gaits);
  return doc.dump(2) + "\n";
}

LibraryFile read_library_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LibraryError(Kind::Io, "cannot open library '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_library(text.str());
}

void write_library_file(const LibraryFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LibraryError(Kind::Io, "cannot write library '" + path + "'");
  out << serialize_library(file);
  if (!out) throw LibraryError(Kind::Io, "failed writing library '" + path + "'");
}

GaitLibrary to_library(const LibraryFile& file) {
  if (file.format_version != kLibraryFormatVersion) {
    throw LibraryError(Kind::Schema, "unsupported format_version " + std::to_string(file.format_version));
  }
  if (file.n_outputs < 1) throw LibraryError(Kind::Dimension, "n_outputs must be >= 1");
  if (file.degree < 1 || file.degree > kMaxDegree) {
    throw LibraryError(Kind::Dimension, "degree must be in [1, " + std::to_string(kMaxDegree) + "]");
  }
  std::vector<Gait> gaits;
  gaits.reserve(file.gaits.size());
  for (std::size_t i = 0; i < file.gaits.size(); ++i) {
    gaits.push_back(record_to_gait(file.gaits[i], i, file.n_outputs, file.degree));
  }
  LibraryMetadata metadata = file.metadata;
  metadata.format_version = file.format_version;
  return GaitLibrary::build(std::move(gaits), file.mirror, std::move(metadata));
}

LibraryFile to_file(const GaitLibrary& lib) {
  LibraryFile file;
  file.format_version = kLibraryFormatVersion;
  file.n_outputs = lib.n_outputs();
  file.degree = lib.degree();
  file.mirror = lib.mirror_map();
  file.metadata = lib.metadata();
  for (const Gait& g : lib.gaits()) {
    GaitRecord record;
    record.name = g.name;
    record.v_x = g.velocity.x;
    record.v_y = g.velocity.y;
    record.step_duration = g.step_duration;
    const Matrix& c = g.curve.coeffs();
    record.coeffs.reserve(static_cast<std::size_t>(c.size()));
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index k = 0; k < c.cols(); ++k) record.coeffs.push_back(c(r, k));
    }
    file.gaits.push_back(std::move(record));
  }
  return file;
}

GaitLibrary load(const std::string& path) { return to_library(read_library_file(path)); }

void save(const GaitLibrary& lib, const std::string& path) { write_library_file(to_file(lib), path); }

ValidationReport validate(const GaitLibrary& lib) {
  ValidationReport report;
  report.gait_count = lib.size();
  report.warnings = lib.warnings();
  switch (lib.index_kind()) {
    case IndexKind::Single: report.index_kind = "single"; break;
    case IndexKind::Segment: report.index_kind = "segment"; break;
    case IndexKind::Triangulated: report.index_kind = "triangulated"; break;
  }
  if (lib.index_kind() != IndexKind::Triangulated) {
    report.warnings.push_back("no 2-D interpolation: fewer than three non-collinear gaits");
  }

  double min_angle = lib.triangles().empty() ? 0.0 : 180.0;
  for (const auto& t : lib.triangles()) {
    const Velocity a = lib.gait(t[0]).velocity, b = lib.gait(t[1]).velocity, c = lib.gait(t[2]).velocity;
    report.hull_area += triangle_area(a, b, c);
    min_angle = std::min(min_angle, min_angle_deg(a, b, c));
  }
  report.min_triangle_angle_deg = min_angle;

  report.coeff_min = std::numeric_limits<double>::infinity();
  report.coeff_max = -std::numeric_limits<double>::infinity();
  double abs_sum = 0.0;
  Eigen::Index count = 0;
  for (const Gait& g : lib.gaits()) {
    const Matrix& c = g.curve.coeffs();
    report.coeff_min = std::min(report.coeff_min, c.minCoeff());
    report.coeff_max = std::max(report.coeff_max, c.maxCoeff());
    abs_sum += c.cwiseAbs().sum();
    count += c.size();

    // The next step runs the mirrored gait at the reflected velocity.
    const Gait next = mirror(lib.interpolate(reflect_lateral(g.velocity)), lib.mirror_map());
    GaitCheck check;
    check.name = g.name;
    check.max_abs_coeff = c.cwiseAbs().maxCoeff();
    check.impact_residual = (c.rightCols(1) - next.curve.coeffs().col(0)).cwiseAbs().maxCoeff();
    report.max_impact_residual = std::max(report.max_impact_residual, check.impact_residual);
    report.gaits.push_back(std::move(check));
  }
  report.coeff_mean_abs = abs_sum / static_cast<double>(count);
  if (report.max_impact_residual > 1e-3) {
    std::ostringstream msg;
    msg << "impact consistency residual up to " << report.max_impact_residual << " rad";
    report.warnings.push_back(msg.str());
  }
  return report;
}

ValidationReport validate(const LibraryFile& file) {
  ValidationReport report;
  const auto hard = [&](const std::string& msg) {
    report.ok = false;
    report.errors.push_back(msg);
  };
  report.gait_count = static_cast<int>(file.gaits.size());
  if (file.format_version != kLibraryFormatVersion) {
    hard("unsupported format_version " + std::to_string(file.format_version));
  }
  if (file.n_outputs < 1) hard("n_outputs must be >= 1");
  if (file.degree < 1 || file.degree > kMaxDegree) hard("degree out of range");
  if (file.gaits.empty()) hard("library has no gaits");
  try {
    file.mirror.validate(file.n_outputs);
  } catch (const LibraryError& e) {
    hard(e.what());
  }
  const std::size_t expected = static_cast<std::size_t>(std::max(file.n_outputs, 0)) *
                               static_cast<std::size_t>(std::max(file.degree + 1, 0));
  for (std::size_t i = 0; i < file.gaits.size(); ++i) {
    const GaitRecord& g = file.gaits[i];
    const std::string label = gait_label(g, i);
    if (g.coeffs.size() != expected) hard(label + ": coeffs has wrong size");
    if (!std::all_of(g.coeffs.begin(), g.coeffs.end(), [](double c) { return std::isfinite(c); })) {
      hard(label + ": coeffs not finite");
    }
    if (!(std::isfinite(g.step_duration) && g.step_duration > 0.0)) hard(label + ": step_duration must be > 0");
    if (!(std::isfinite(g.v_x) && std::isfinite(g.v_y))) hard(label + ": velocity not finite");
    for (std::size_t j = i + 1; j < file.gaits.size(); ++j) {
      if (g.v_x == file.gaits[j].v_x && g.v_y == file.gaits[j].v_y) {
        hard("duplicate velocity: " + label + " and " + gait_label(file.gaits[j], j));
      }
    }
  }
  if (!report.ok) return report;

  try {
    ValidationReport full = validate(to_library(file));
    return full;
  } catch (const std::exception& e) {
    hard(e.what());
    return report;
  }
}

std::string ValidationReport::to_json() const {
  ordered_json doc;
  doc["ok"] = ok;
  doc["errors"] = errors;
  doc["warnings"] = warnings;
  doc["gait_count"] = gait_count;
  doc["index_kind"] = index_kind;
  doc["hull_area"] = hull_area;
  doc["min_triangle_angle_deg"] = min_triangle_angle_deg;
  doc["max_impact_residual"] = max_impact_residual;
  doc["coeff_min"] = gaits.empty() ? 0.0 : coeff_min;
  doc["coeff_max"] = gaits.empty() ? 0.0 : coeff_max;
  doc["coeff_mean_abs"] = coeff_mean_abs;
  ordered_json per_gait = ordered_json::array();
  for (const GaitCheck& g : gaits) {
    per_gait.push_back({{"name", g.name}, {"impact_residual", g.impact_residual}, {"max_abs_coeff", g.max_abs_coeff}});
  }
  doc["gaits"] = std::move(per_gait);
  return doc.dump();
}

Gait parse_gait_table(std::istream& in, const std::string& source) {
  const auto fail = [&](const std::string& msg) { throw LibraryError(Kind::Schema, source + ": " + msg); };
  Gait gait;
  bool have_vx = false, have_vy = false, have_duration = false;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto colon = line.find(':');
    if (colon != std::string::npos) {
      if (!rows.empty()) fail("header field after coefficient rows");
      std::string key = line.substr(first, colon - first);
      key.erase(key.find_last_not_of(" \t") + 1);
      std::istringstream value(line.substr(colon + 1));
      if (key == "name") {
        value >> std::ws;
        std::getline(value, gait.name);
        gait.name.erase(gait.name.find_last_not_of(" \t\r") + 1);
        continue;
      }
      double number = 0.0;
      if (!(value >> number)) fail("field '" + key + "' is not a number");
      if (key == "v_x") {
        gait.velocity.x = number;
        have_vx = true;
      } else if (key == "v_y") {
        gait.velocity.y = number;
        have_vy = true;
      } else if (key == "step_duration") {
        gait.step_duration = number;
        have_duration = true;
      } else {
        fail("unknown header field '" + key + "'");
      }
      continue;
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        fail("bad coefficient '" + token + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw LibraryError(Kind::Dimension, source + ": coefficient rows differ in length");
    }
    rows.push_back(std::move(row));
  }
  if (!have_vx || !have_vy || !have_duration) fail("missing v_x, v_y or step_duration header");
  if (rows.empty()) fail("no coefficient rows");

  Matrix coeffs(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      coeffs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  try {
    gait.curve = BezierCurve(std::move(coeffs));
  } catch (const std::invalid_argument& e) {
    throw LibraryError(Kind::InvalidGait, source + ": " + e.what());
  }
  if (gait.name.empty()) gait.name = source;
  return gait;
}

GaitLibrary import_tables(const std::vector<std::string>& paths, MirrorMap mirror, LibraryMetadata metadata) {
  std::vector<Gait> gaits;
  gaits.reserve(paths.size());
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw LibraryError(Kind::Io, "cannot open gait table '" + path + "'");
    gaits.push_back(parse_gait_table(in, path));
  }
  return GaitLibrary::build(std::move(gaits), std::move(mirror), std::move(metadata));
}

}  // namespace gaitlib
