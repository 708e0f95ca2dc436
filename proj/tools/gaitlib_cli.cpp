// gaitlib: generate, inspect and stream gait-library references.

#include "gaitlib/app.hpp"
#include "gaitlib/library_io.hpp"
#include "gaitlib/server.hpp"
#include "gaitlib/synthetic.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace gaitlib;

// Exit codes: 0 ok, 1 runtime failure, 2 usage or malformed input.
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int fail(const std::string& category, const std::string& message, int code = kExitFailure) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error: " << category << ": " << flat << '\n';
  return code;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

ReferenceServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int cmd_gen(const std::string& spec_path, const std::string& out_path) {
  SyntheticSpec spec = SyntheticSpec::defaults();
  try {
    if (!spec_path.empty()) spec = SyntheticSpec::parse_json(read_text(spec_path));
  } catch (const std::exception& e) {
    return fail("spec", e.what(), kExitUsage);
  }
  GaitLibrary lib = generate_synthetic(spec);
  const ValidationReport report = validate(lib);
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report.to_json() << '\n';
  if (!report.ok) return fail("validation", "generated library failed validation");
  save(lib, out_path);
  return 0;
}

int cmd_validate(const std::string& library_path) {
  const ValidationReport report = validate(read_library_file(library_path));
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report.to_json() << '\n';
  return report.ok ? 0 : fail("validation", report.errors.empty() ? "invalid library" : report.errors.front());
}

int cmd_stream(const std::string& library_path, const std::string& script_path, const std::string& out_path,
               const StreamOptions& options) {
  const GaitLibrary lib = load(library_path);
  const CommandScript script = CommandScript::load_csv(script_path);
  if (out_path.empty() || out_path == "-") {
    run_stream(lib, script, options, std::cout);
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) return fail("io", "cannot write '" + out_path + "'");
  run_stream(lib, script, options, out);
  return out ? 0 : fail("io", "failed writing '" + out_path + "'");
}

int cmd_serve(const std::string& library_path, int port, double rate, std::size_t max_clients) {
  const GaitLibrary lib = load(library_path);
  EngineConfig config;
  config.tick_period = 1.0 / rate;
  ReferenceServer server(lib, config, static_cast<std::uint16_t>(port));
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on 127.0.0.1:" << server.port() << '\n';
  server.serve(max_clients);
  g_server = nullptr;
  return 0;
}

int cmd_bench(const std::string& library_path, const BenchOptions& options) {
  const GaitLibrary lib = load(library_path);
  const BenchReport report = run_bench(lib, options);
  if (!report.probe_passed) {
    std::cout << report.json_lines();
    return fail("equivalence", "tick_batch differs from sequential ticks on the probe");
  }
  std::cerr << "single thread: " << report.single_thread_rate << " samples/s\n"
            << "batch " << report.batch << " x " << report.workers << " workers: " << report.batch_rate
            << " samples/s\n"
            << "batch 1: " << report.batch1_rate << " samples/s\n";
  if (report.single_thread_rate < kThroughputTarget) {
    std::cerr << "warning: single-thread throughput below " << kThroughputTarget << " samples/s\n";
  }
  std::cout << report.json_lines();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gait library reference engine"};
  app.require_subcommand(1);

  std::string spec_path, out_path, library_path, script_path;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic gait library");
  gen->add_option("--spec", spec_path, "Generator spec (JSON); built-in defaults when omitted")->check(CLI::ExistingFile);
  gen->add_option("--out", out_path, "Library file to write")->required();

  auto* val = app.add_subcommand("validate", "Validate a library file and print a JSON report");
  val->add_option("--library", library_path, "Library file")->required()->check(CLI::ExistingFile);

  StreamOptions stream_options;
  std::string gains_text;
  auto* stream = app.add_subcommand("stream", "Run the engine over a command script and write a CSV trace");
  stream->add_option("--library", library_path, "Library file")->required()->check(CLI::ExistingFile);
  stream->add_option("--script", script_path, "Command script CSV")->required()->check(CLI::ExistingFile);
  stream->add_option("--out", out_path, "Trace CSV (stdout when omitted)");
  stream->add_option("--rate", stream_options.rate, "Engine rate in Hz")->capture_default_str();
  stream->add_option("--duration", stream_options.duration, "Run length in seconds")->capture_default_str();
  stream->add_flag("--plant", stream_options.plant, "Close the loop with the double-integrator plant");
  stream->add_option("--gains", gains_text, "kp[,kd[,torque_limit]]; kd defaults to critical damping");
  stream->add_option("--inertia", stream_options.inertia, "Plant inertia per joint")->capture_default_str();

  int port = 7050;
  double serve_rate = 50.0;
  std::size_t max_clients = 0;
  auto* serve = app.add_subcommand("serve", "Serve references over the line protocol");
  serve->add_option("--library", library_path, "Library file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--rate", serve_rate, "Engine rate in Hz")->capture_default_str();
  serve->add_option("--max-clients", max_clients, "Exit after this many connections (0 = never)");

  BenchOptions bench_options;
  auto* bench = app.add_subcommand("bench", "Measure tick throughput");
  bench->add_option("--library", library_path, "Library file")->required()->check(CLI::ExistingFile);
  bench->add_option("--batch", bench_options.batch, "Batch size")->capture_default_str();
  bench->add_option("--workers", bench_options.workers, "Batch worker threads (0 = all cores)");
  bench->add_option("--seconds", bench_options.seconds, "Timing window per measurement")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  try {
    if (*gen) return cmd_gen(spec_path, out_path);
    if (*val) return cmd_validate(library_path);
    if (*stream) {
      if (!gains_text.empty()) {
        std::vector<double> values;
        std::stringstream in(gains_text);
        std::string item;
        while (std::getline(in, item, ',')) values.push_back(std::stod(item));
        if (values.empty() || values.size() > 3) return fail("usage", "--gains takes kp[,kd[,limit]]", kExitUsage);
        stream_options.kp = values[0];
        if (values.size() > 1) stream_options.kd = values[1];
        if (values.size() > 2) stream_options.torque_limit = values[2];
      }
      return cmd_stream(library_path, script_path, out_path, stream_options);
    }
    if (*serve) return cmd_serve(library_path, port, serve_rate, max_clients);
    if (*bench) return cmd_bench(library_path, bench_options);
  } catch (const LibraryError& e) {
    return fail(std::string("library.") + to_string(e.kind()), e.what());
  } catch (const ScriptError& e) {
    return fail("script", e.what());
  } catch (const SpecError& e) {
    return fail("spec", e.what(), kExitUsage);
  } catch (const GenerationError& e) {
    return fail("generation", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("argument", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return kExitUsage;
}
