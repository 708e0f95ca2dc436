#pragma once

#include "gaitlib/reference_engine.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitlib {

// Line protocol, one request and one response per line:
//
//   HELLO <version>                          -> OK <version> <n_outputs>
//   TICK <ts> <vx> <vy> <heading> <dvx> <dvy> [<dq_0> ... <dq_n-1>]
//                                            -> SAMPLE <ts> <t> <step> <L|R> <phase> <vtx> <vty> <sat>
//                                               <q_des x n> <qdot_des x n> <q_nominal x n>
//   RESET                                    -> OK reset
//   BYE                                      -> OK bye
//
// Failures answer `ERR <category> <message>`. Numbers use the shortest
// text that round-trips, so decoded samples equal in-process ones exactly.
inline constexpr int kProtocolVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TickRequest {
  double timestamp = 0.0;
  CommandInput command;
};

std::string encode_tick(const TickRequest& request);
TickRequest decode_tick(std::string_view line);

std::string encode_sample(double timestamp, const ReferenceSample& sample);
/// Parses a SAMPLE line; `timestamp` receives the echoed request time.
ReferenceSample decode_sample(std::string_view line, int n_outputs, double* timestamp = nullptr);

/// Server-side state for one connection; transport independent.
class ProtocolSession {
 public:
  ProtocolSession(const GaitLibrary& lib, EngineConfig config, Velocity idle_velocity = {});

  /// Response line (no trailing newline) for one request line.
  std::string handle(std::string_view line);

  /// Back to the idle state: fresh engine, handshake required.
  void reset();

  bool handshake_done() const { return handshake_done_; }
  bool closed() const { return closed_; }
  const EngineState& engine() const { return engine_; }

 private:
  const GaitLibrary* lib_;
  EngineConfig config_;
  Velocity idle_velocity_;
  EngineState engine_;
  bool handshake_done_ = false;
  bool closed_ = false;
};

}  // namespace gaitlib
