#include "gaitlib/trace_csv.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace gaitlib {

void append_number(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  out.append(buf.data(), ptr);
}

std::string format_number(double value) {
  std::string out;
  append_number(out, value);
  return out;
}

void write_reference_header(std::ostream& out, int n_outputs) {
  out << "t,step_index,stance,phase,v_target_x,v_target_y";
  for (const char* name : {"q_des", "qdot_des", "q_nominal"}) {
    for (int i = 0; i < n_outputs; ++i) out << ',' << name << i;
  }
  out << '\n';
}

void write_reference_row(std::ostream& out, const ReferenceSample& sample) {
  std::string line;
  append_number(line, sample.t);
  line += ',';
  line += std::to_string(sample.step_index);
  line += ',';
  line += to_string(sample.stance);
  for (double v : {sample.phase, sample.v_target.x, sample.v_target.y}) {
    line += ',';
    append_number(line, v);
  }
  for (const Vector* vec : {&sample.q_des, &sample.qdot_des, &sample.q_nominal}) {
    for (Eigen::Index i = 0; i < vec->size(); ++i) {
      line += ',';
      append_number(line, (*vec)(i));
    }
  }
  line += '\n';
  out << line;
}

}  // namespace gaitlib
