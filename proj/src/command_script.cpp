#include "gaitlib/command_script.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gaitlib {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ScriptError("script line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

}  // namespace

CommandScript::CommandScript(std::vector<Row> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ScriptError("command script is empty");
  if (rows_.front().t != 0.0) throw ScriptError("command script must start at t = 0");
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (!(rows_[i].t > rows_[i - 1].t)) throw ScriptError("command script times must increase strictly");
    if (rows_[i].command.delta_q.size() != rows_.front().command.delta_q.size()) {
      throw ScriptError("command script rows differ in residual width");
    }
  }
}

CommandScript CommandScript::constant(const CommandInput& command) { return CommandScript({{0.0, command}}); }

int CommandScript::residual_width() const {
  return rows_.empty() ? 0 : static_cast<int>(rows_.front().command.delta_q.size());
}

const CommandInput& CommandScript::at(double t) const {
  if (rows_.empty()) throw ScriptError("command script is empty");
  const auto it = std::upper_bound(rows_.begin(), rows_.end(), t, [](double time, const Row& row) {
    return time < row.t;
  });
  return it == rows_.begin() ? rows_.front().command : std::prev(it)->command;
}

CommandScript CommandScript::parse_csv(std::istream& in) {
  static const std::vector<std::string> kFixed = {"t", "v_x", "v_y", "heading", "dv_x", "dv_y"};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.size() < kFixed.size() || !std::equal(kFixed.begin(), kFixed.end(), header.begin())) {
    throw ScriptError("script header must start with t,v_x,v_y,heading,dv_x,dv_y");
  }
  const std::size_t width = header.size() - kFixed.size();
  for (std::size_t k = 0; k < width; ++k) {
    if (header[kFixed.size() + k] != "dq" + std::to_string(k)) {
      throw ScriptError("script residual column " + std::to_string(k) + " must be named dq" + std::to_string(k));
    }
  }

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ScriptError("script line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields");
    }
    Row row;
    row.t = parse_number(fields[0], line_no);
    row.command.v_user = {parse_number(fields[1], line_no), parse_number(fields[2], line_no)};
    row.command.heading = parse_number(fields[3], line_no);
    row.command.delta_v = {parse_number(fields[4], line_no), parse_number(fields[5], line_no)};
    row.command.delta_q.resize(static_cast<Eigen::Index>(width));
    for (std::size_t k = 0; k < width; ++k) {
      row.command.delta_q(static_cast<Eigen::Index>(k)) = parse_number(fields[kFixed.size() + k], line_no);
    }
    rows.push_back(std::move(row));
  }
  return CommandScript(std::move(rows));
}

CommandScript CommandScript::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open script '" + path + "'");
  return parse_csv(in);
}

}  // namespace gaitlib
