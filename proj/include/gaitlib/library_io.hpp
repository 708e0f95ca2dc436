#pragma once

#include "gaitlib/gait_model.hpp"

#include <istream>
#include <string>
#include <vector>

namespace gaitlib {

inline constexpr int kLibraryFormatVersion = 1;

/// Gait exactly as stored on disk, before any validation.
struct GaitRecord {
  std::string name;
  double v_x = 0.0;
  double v_y = 0.0;
  double step_duration = 0.0;
  std::vector<double> coeffs;  // row-major, n_outputs x (degree + 1)
};

/// Parsed library document. Only the JSON shape has been checked.
struct LibraryFile {
  int format_version = kLibraryFormatVersion;
  int n_outputs = 0;
  int degree = 0;
  MirrorMap mirror;
  std::vector<GaitRecord> gaits;
  LibraryMetadata metadata;
};

/// Throws LibraryError(Schema) on malformed JSON or missing/mistyped fields.
LibraryFile parse_library(const std::string& text);
std::string serialize_library(const LibraryFile& file);

LibraryFile read_library_file(const std::string& path);
void write_library_file(const LibraryFile& file, const std::string& path);

/// Full validation into an immutable library; throws LibraryError naming
/// the offending gait and field.
GaitLibrary to_library(const LibraryFile& file);
LibraryFile to_file(const GaitLibrary& lib);

GaitLibrary load(const std::string& path);
void save(const GaitLibrary& lib, const std::string& path);

struct GaitCheck {
  std::string name;
  double impact_residual = 0.0;  // max-norm mismatch when chaining into the mirrored step
  double max_abs_coeff = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;  // hard invariant violations
  std::vector<std::string> warnings;
  int gait_count = 0;
  std::string index_kind;
  double hull_area = 0.0;
  double min_triangle_angle_deg = 0.0;
  double max_impact_residual = 0.0;
  double coeff_min = 0.0;
  double coeff_max = 0.0;
  double coeff_mean_abs = 0.0;
  std::vector<GaitCheck> gaits;

  std::string to_json() const;
};

ValidationReport validate(const LibraryFile& file);
ValidationReport validate(const GaitLibrary& lib);

/// Plain-table gait (one per file):
///
///   # comment lines start with '#'
///   name: walk_fast
///   v_x: 0.3
///   v_y: 0
///   step_duration: 0.38
///   <n_outputs rows of degree+1 whitespace-separated numbers>
Gait parse_gait_table(std::istream& in, const std::string& source = "<table>");
GaitLibrary import_tables(const std::vector<std::string>& paths, MirrorMap mirror, LibraryMetadata metadata = {});

}  // namespace gaitlib
