#include "gaitlib/protocol.hpp"

#include "gaitlib/trace_csv.hpp"

#include <charconv>
#include <cmath>
#include <vector>

namespace gaitlib {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ProtocolError("bad number '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t to_int(std::string_view text) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ProtocolError("bad integer '" + std::string(text) + "'");
  }
  return value;
}

void append(std::string& out, double value) {
  out += ' ';
  append_number(out, value);
}

}  // namespace

std::string encode_tick(const TickRequest& r) {
  std::string line = "TICK";
  for (double v : {r.timestamp, r.command.v_user.x, r.command.v_user.y, r.command.heading, r.command.delta_v.x,
                   r.command.delta_v.y}) {
    append(line, v);
  }
  for (Eigen::Index i = 0; i < r.command.delta_q.size(); ++i) append(line, r.command.delta_q(i));
  return line;
}

TickRequest decode_tick(std::string_view line) {
  const auto t = tokens(line);
  if (t.empty() || t[0] != "TICK") throw ProtocolError("expected TICK");
  if (t.size() < 7) throw ProtocolError("TICK needs timestamp, v_x, v_y, heading, dv_x, dv_y");
  TickRequest r;
  r.timestamp = to_double(t[1]);
  r.command.v_user = {to_double(t[2]), to_double(t[3])};
  r.command.heading = to_double(t[4]);
  r.command.delta_v = {to_double(t[5]), to_double(t[6])};
  r.command.delta_q.resize(static_cast<Eigen::Index>(t.size() - 7));
  for (std::size_t i = 7; i < t.size(); ++i) r.command.delta_q(static_cast<Eigen::Index>(i - 7)) = to_double(t[i]);
  return r;
}

std::string encode_sample(double timestamp, const ReferenceSample& s) {
  std::string line = "SAMPLE";
  append(line, timestamp);
  append(line, s.t);
  line += ' ';
  line += std::to_string(s.step_index);
  line += ' ';
  line += to_string(s.stance);
  for (double v : {s.phase, s.v_target.x, s.v_target.y}) append(line, v);
  line += s.residual_saturated ? " 1" : " 0";
  for (const Vector* vec : {&s.q_des, &s.qdot_des, &s.q_nominal}) {
    for (Eigen::Index i = 0; i < vec->size(); ++i) append(line, (*vec)(i));
  }
  return line;
}

ReferenceSample decode_sample(std::string_view line, int n_outputs, double* timestamp) {
  const auto t = tokens(line);
  if (t.empty() || t[0] != "SAMPLE") throw ProtocolError("expected SAMPLE, got '" + std::string(line) + "'");
  const std::size_t expected = 9 + 3 * static_cast<std::size_t>(n_outputs);
  if (t.size() != expected) throw ProtocolError("SAMPLE has the wrong field count");
  ReferenceSample s;
  if (timestamp != nullptr) *timestamp = to_double(t[1]);
  s.t = to_double(t[2]);
  s.step_index = to_int(t[3]);
  if (t[4] != "L" && t[4] != "R") throw ProtocolError("bad stance");
  s.stance = t[4] == "L" ? Stance::Left : Stance::Right;
  s.phase = to_double(t[5]);
  s.v_target = {to_double(t[6]), to_double(t[7])};
  s.residual_saturated = t[8] == "1";
  std::size_t k = 9;
  for (Vector* vec : {&s.q_des, &s.qdot_des, &s.q_nominal}) {
    vec->resize(n_outputs);
    for (int i = 0; i < n_outputs; ++i) (*vec)(i) = to_double(t[k++]);
  }
  return s;
}

ProtocolSession::ProtocolSession(const GaitLibrary& lib, EngineConfig config, Velocity idle_velocity)
    : lib_(&lib), config_(config), idle_velocity_(idle_velocity) {
  reset();
}

void ProtocolSession::reset() {
  engine_ = init_engine(*lib_, idle_velocity_, config_);
  handshake_done_ = false;
  closed_ = false;
}

std::string ProtocolSession::handle(std::string_view line) {
  const auto t = tokens(line);
  if (t.empty()) return "ERR malformed empty request";

  if (!handshake_done_) {
    if (t[0] != "HELLO" || t.size() != 2) {
      closed_ = true;
      return "ERR handshake expected HELLO <version>";
    }
    std::int64_t version = 0;
    try {
      version = to_int(t[1]);
    } catch (const ProtocolError&) {
      version = -1;
    }
    if (version != kProtocolVersion) {
      closed_ = true;
      return "ERR version server speaks " + std::to_string(kProtocolVersion);
    }
    handshake_done_ = true;
    return "OK " + std::to_string(kProtocolVersion) + " " + std::to_string(lib_->n_outputs());
  }

  if (t[0] == "BYE") {
    closed_ = true;
    return "OK bye";
  }
  if (t[0] == "RESET") {
    engine_ = init_engine(*lib_, idle_velocity_, config_);
    return "OK reset";
  }
  if (t[0] != "TICK") return "ERR malformed unknown request '" + std::string(t[0]) + "'";

  TickRequest request;
  try {
    request = decode_tick(line);
  } catch (const ProtocolError& e) {
    return std::string("ERR malformed ") + e.what();
  }
  if (request.command.delta_q.size() != 0 && request.command.delta_q.size() != lib_->n_outputs()) {
    return "ERR malformed expected 0 or " + std::to_string(lib_->n_outputs()) + " residual values";
  }
  try {
    return encode_sample(request.timestamp, tick(engine_, *lib_, request.command));
  } catch (const std::invalid_argument& e) {
    return std::string("ERR command ") + e.what();
  }
}

}  // namespace gaitlib
