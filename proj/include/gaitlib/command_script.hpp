#pragma once

#include "gaitlib/reference_engine.hpp"

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitlib {

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise-constant command schedule.
///
/// CSV layout: header `t,v_x,v_y,heading,dv_x,dv_y[,dq0,...,dq{n-1}]`, one
/// row per change point, t strictly increasing from 0. Rows without dq
/// columns apply no joint residual.
class CommandScript {
 public:
  struct Row {
    double t = 0.0;
    CommandInput command;
  };

  CommandScript() = default;
  /// Throws ScriptError unless times start at 0, increase strictly and
  /// every row carries the same residual width.
  explicit CommandScript(std::vector<Row> rows);

  static CommandScript constant(const CommandInput& command);
  static CommandScript parse_csv(std::istream& in);
  static CommandScript load_csv(const std::string& path);

  const std::vector<Row>& rows() const { return rows_; }
  /// Number of dq columns (0 when the script carries no joint residual).
  int residual_width() const;
  double last_change() const { return rows_.empty() ? 0.0 : rows_.back().t; }

  /// Command in force at time t (the last row with row.t <= t).
  const CommandInput& at(double t) const;

 private:
  std::vector<Row> rows_;
};

}  // namespace gaitlib
