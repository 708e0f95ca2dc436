#include "gaitlib/app.hpp"

#include "gaitlib/trace_csv.hpp"

#include <json.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace gaitlib {

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a(i), b(i))) return false;
  }
  return true;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a.data()[i], b.data()[i])) return false;
  }
  return true;
}

bool same_bits(Velocity a, Velocity b) { return same_bits(a.x, b.x) && same_bits(a.y, b.y); }

bool same_bits(const PhaseClock& a, const PhaseClock& b) {
  return same_bits(a.t0, b.t0) && same_bits(a.t1, b.t1) && same_bits(a.T, b.T) && same_bits(a.t, b.t);
}

template <typename Body>
double samples_per_second(double seconds, Body&& body) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::size_t samples = 0;
  double elapsed = 0.0;
  do {
    samples += body();
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
  } while (elapsed < seconds);
  return static_cast<double>(samples) / elapsed;
}

}  // namespace

void run_stream(const GaitLibrary& lib, const CommandScript& script, const StreamOptions& options,
                std::ostream& csv) {
  if (script.residual_width() != 0 && script.residual_width() != lib.n_outputs()) {
    throw ScriptError("script has " + std::to_string(script.residual_width()) + " residual columns, library has " +
                      std::to_string(lib.n_outputs()) + " outputs");
  }
  if (!(options.rate > 0.0) || !(options.duration >= 0.0)) {
    throw std::invalid_argument("stream needs rate > 0 and duration >= 0");
  }
  EngineConfig config;
  config.tick_period = 1.0 / options.rate;
  EngineState engine = init_engine(lib, script.at(0.0).v_user, config);

  if (!options.plant) {
    const long ticks = std::lround(options.duration * options.rate);
    write_reference_header(csv, lib.n_outputs());
    for (long k = 0; k < ticks; ++k) write_reference_row(csv, tick(engine, lib, script.at(engine.clock().t)));
    return;
  }

  const int n = lib.n_outputs();
  const Vector inertia = Vector::Constant(n, options.inertia);
  PDGains gains = PDGains::critically_damped(Vector::Constant(n, options.kp), inertia, options.torque_limit);
  if (options.kd >= 0.0) gains.kd = Vector::Constant(n, options.kd);
  const PlantState plant = PlantState::at_rest(engine.active.blended.eval(0.0), inertia);
  const ClosedLoopTrace trace =
      run_closed_loop(engine, lib, plant, gains, options.duration, script, {options.inner_rate});
  trace.write_csv(csv);
}

EngineProbe random_engine_probe(const GaitLibrary& lib, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double lo_x = lib.gait(0).velocity.x, hi_x = lo_x, lo_y = lib.gait(0).velocity.y, hi_y = lo_y;
  for (const Gait& g : lib.gaits()) {
    lo_x = std::min(lo_x, g.velocity.x);
    hi_x = std::max(hi_x, g.velocity.x);
    lo_y = std::min(lo_y, g.velocity.y);
    hi_y = std::max(hi_y, g.velocity.y);
  }
  // Slightly beyond the hull so that projection is exercised too.
  std::uniform_real_distribution<double> vx(lo_x - 0.1, hi_x + 0.1);
  std::uniform_real_distribution<double> vy(lo_y - 0.1, hi_y + 0.1);
  std::uniform_real_distribution<double> heading(-0.5, 0.5);
  std::uniform_real_distribution<double> residual(-0.4, 0.4);
  std::uniform_int_distribution<int> warmup(0, 60);

  EngineProbe probe;
  probe.states.reserve(count);
  probe.commands.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EngineConfig config;
    config.initial_stance = (i % 2 == 0) ? Stance::Left : Stance::Right;
    EngineState state = init_engine(lib, {vx(rng), vy(rng)}, config);
    const int steps = warmup(rng);
    CommandInput cmd;
    cmd.v_user = {vx(rng), vy(rng)};
    for (int k = 0; k < steps; ++k) {
      if (k % 17 == 0) cmd.v_user = {vx(rng), vy(rng)};
      tick(state, lib, cmd);
    }
    CommandInput probe_cmd;
    probe_cmd.v_user = {vx(rng), vy(rng)};
    probe_cmd.heading = heading(rng);
    probe_cmd.delta_v = {0.1 * residual(rng), 0.1 * residual(rng)};
    probe_cmd.delta_q = Vector::NullaryExpr(lib.n_outputs(), [&] { return residual(rng); });
    probe.states.push_back(std::move(state));
    probe.commands.push_back(std::move(probe_cmd));
  }
  return probe;
}

bool bitwise_equal(const ReferenceSample& a, const ReferenceSample& b) {
  return same_bits(a.t, b.t) && same_bits(a.q_des, b.q_des) && same_bits(a.qdot_des, b.qdot_des) &&
         same_bits(a.q_nominal, b.q_nominal) && same_bits(a.delta_q, b.delta_q) && same_bits(a.phase, b.phase) &&
         same_bits(a.blend_phase, b.blend_phase) && a.stance == b.stance && a.step_index == b.step_index &&
         same_bits(a.v_target, b.v_target) && a.residual_saturated == b.residual_saturated &&
         a.step_event == b.step_event && same_bits(a.impact_mismatch, b.impact_mismatch);
}

bool bitwise_equal(const EngineState& a, const EngineState& b) {
  return same_bits(a.active.blended.coeffs(), b.active.blended.coeffs()) &&
         same_bits(a.active.source_tail.coeffs(), b.active.source_tail.coeffs()) &&
         same_bits(a.active.target_tail.coeffs(), b.active.target_tail.coeffs()) &&
         same_bits(a.active.clock, b.active.clock) && same_bits(a.active.target_velocity, b.active.target_velocity) &&
         a.stance == b.stance && a.step_index == b.step_index && a.tick_count == b.tick_count &&
         same_bits(a.last_target_velocity, b.last_target_velocity);
}

BenchReport run_bench(const GaitLibrary& lib, const BenchOptions& options) {
  BenchReport report;
  report.batch = std::max<std::size_t>(options.batch, 1);
  report.workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;

  // Equivalence probe before any timing.
  constexpr std::size_t kProbe = 1024;
  EngineProbe probe = random_engine_probe(lib, kProbe, 20240611);
  std::vector<EngineState> sequential_states = probe.states;
  std::vector<ReferenceSample> sequential;
  sequential.reserve(kProbe);
  for (std::size_t i = 0; i < kProbe; ++i) sequential.push_back(tick(sequential_states[i], lib, probe.commands[i]));
  const std::vector<ReferenceSample> batched = tick_batch(probe.states, lib, probe.commands, report.workers);
  report.probe_size = kProbe;
  report.probe_passed = true;
  for (std::size_t i = 0; i < kProbe; ++i) {
    if (!bitwise_equal(sequential[i], batched[i]) || !bitwise_equal(sequential_states[i], probe.states[i])) {
      report.probe_passed = false;
      break;
    }
  }
  if (!report.probe_passed) return report;

  // Single engine with a command that changes every half second.
  {
    EngineState engine = init_engine(lib, {0.0, 0.0});
    CommandInput cmd;
    std::size_t k = 0;
    report.single_thread_rate = samples_per_second(options.seconds, [&] {
      for (int i = 0; i < 1000; ++i, ++k) {
        cmd.v_user = {(k / 25) % 2 == 0 ? 0.1 : 0.3, 0.0};
        tick(engine, lib, cmd);
      }
      return std::size_t{1000};
    });
  }

  const auto batch_rate = [&](std::size_t size, unsigned workers) {
    EngineProbe p = random_engine_probe(lib, size, 7);
    return samples_per_second(options.seconds, [&] {
      for (int i = 0; i < 10; ++i) tick_batch(p.states, lib, p.commands, workers);
      return 10 * size;
    });
  };
  report.batch_rate = batch_rate(report.batch, report.workers);
  report.batch1_rate = batch_rate(1, 1);
  return report;
}

std::string BenchReport::json_lines() const {
  using json = nlohmann::ordered_json;
  std::string out;
  out += json{{"metric", "probe"}, {"passed", probe_passed}, {"states", probe_size}}.dump() + "\n";
  out += json{{"metric", "single_thread"}, {"samples_per_second", single_thread_rate},
              {"target", kThroughputTarget}, {"meets_target", single_thread_rate >= kThroughputTarget}}
             .dump() +
         "\n";
  out += json{{"metric", "batch"}, {"batch", batch}, {"workers", workers}, {"samples_per_second", batch_rate}}.dump() +
         "\n";
  out += json{{"metric", "batch_1"}, {"batch", 1}, {"workers", 1}, {"samples_per_second", batch1_rate}}.dump() + "\n";
  return out;
}

}  // namespace gaitlib
