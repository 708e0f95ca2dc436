#pragma once

#include "gaitlib/command_script.hpp"
#include "gaitlib/joint_tracking.hpp"
#include "gaitlib/reference_engine.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace gaitlib {

struct StreamOptions {
  double rate = 50.0;       // Hz
  double duration = 10.0;   // s
  bool plant = false;       // closed loop with the double-integrator plant
  double kp = 40.0;
  double kd = -1.0;         // negative: critically damped for `inertia`
  double torque_limit = 50.0;
  double inertia = 0.01;
  double inner_rate = 2000.0;
};

/// Runs the engine over the script and writes the trace CSV (reference
/// columns, or tracking columns when options.plant is set).
/// Throws ScriptError when the script's residual width does not match the library.
void run_stream(const GaitLibrary& lib, const CommandScript& script, const StreamOptions& options,
                std::ostream& csv);

/// Engines scattered over the velocity hull and advanced by a few random
/// ticks, with one random command each. Deterministic for a seed.
struct EngineProbe {
  std::vector<EngineState> states;
  std::vector<CommandInput> commands;
};
EngineProbe random_engine_probe(const GaitLibrary& lib, std::size_t count, std::uint64_t seed);

bool bitwise_equal(const ReferenceSample& a, const ReferenceSample& b);
bool bitwise_equal(const EngineState& a, const EngineState& b);

struct BenchOptions {
  std::size_t batch = 256;
  unsigned workers = 0;
  double seconds = 0.5;  // timing window per measurement
};

struct BenchReport {
  bool probe_passed = false;
  std::size_t probe_size = 0;
  double single_thread_rate = 0.0;  // samples/s
  double batch_rate = 0.0;          // samples/s
  double batch1_rate = 0.0;         // samples/s with batch size 1
  std::size_t batch = 0;
  unsigned workers = 0;

  /// One JSON object per line: probe, single_thread, batch, batch_1.
  std::string json_lines() const;
};

BenchReport run_bench(const GaitLibrary& lib, const BenchOptions& options);

inline constexpr double kThroughputTarget = 100000.0;  // samples/s

}  // namespace gaitlib
