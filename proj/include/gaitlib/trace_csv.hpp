#pragma once

#include "gaitlib/reference_engine.hpp"

#include <ostream>
#include <string>

namespace gaitlib {

/// Appends the shortest decimal text that parses back to exactly `value`.
void append_number(std::string& out, double value);
std::string format_number(double value);

/// Reference trace columns: t, step_index, stance, phase, v_target_x,
/// v_target_y, q_des*, qdot_des*, q_nominal*.
void write_reference_header(std::ostream& out, int n_outputs);
void write_reference_row(std::ostream& out, const ReferenceSample& sample);

}  // namespace gaitlib
