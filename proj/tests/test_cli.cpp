#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

#include "gaitlib/library_io.hpp"
#include "gaitlib/trace_csv.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace gaitlib;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GAITLIB_CLI;
const std::string kData = GAITLIB_DATA_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("gaitlib_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  Result run(const std::string& args) const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const int status = std::system((kCli + " " + args + " >" + out + " 2>" + err).c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read(out), read(err)};
  }

  static std::string read(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name), std::ios::binary) << text; }
};

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Rebuilds the fields of a reference trace that the property checker uses.
std::vector<ReferenceSample> samples_from_csv(const std::string& text, int n) {
  const auto rows = read_csv(text);
  std::vector<ReferenceSample> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& c = rows[r];
    ReferenceSample s;
    s.t = std::stod(c[0]);
    s.step_index = std::stoll(c[1]);
    s.stance = c[2] == "L" ? Stance::Left : Stance::Right;
    s.phase = std::stod(c[3]);
    s.q_nominal.resize(n);
    for (int i = 0; i < n; ++i) s.q_nominal(i) = std::stod(c[static_cast<std::size_t>(6 + 2 * n + i)]);
    out.push_back(std::move(s));
  }
  // step_event is not a CSV column; it is implied by step_index changes.
  for (std::size_t k = 1; k < out.size(); ++k) out[k].step_event = out[k].step_index != out[k - 1].step_index;
  return out;
}

}  // namespace

TEST_CASE("gen") {
  Sandbox box;

  SUBCASE("shipped default spec gives the 39-gait library") {
    const Result r = box.run("gen --spec " + kData + "/default_spec.json --out " + box.path("lib.json"));
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["ok"] == true);
    const GaitLibrary lib = load(box.path("lib.json"));
    CHECK(lib.size() == 39);
    CHECK(lib.n_outputs() == 10);
    CHECK(lib.degree() == 7);
    CHECK(Sandbox::read(box.path("lib.json")) == Sandbox::read(kData + "/example_library.json"));
  }

  SUBCASE("single gait spec writes a file and warns") {
    box.write("one.json", R"({"velocities": [[0.1, 0.0]]})");
    const Result r = box.run("gen --spec " + box.path("one.json") + " --out " + box.path("one_lib.json"));
    CHECK(r.code == 0);
    CHECK(r.err.find("warning: no 2-D interpolation") != std::string::npos);
    CHECK(load(box.path("one_lib.json")).size() == 1);
  }

  SUBCASE("malformed spec is a usage error") {
    box.write("bad.json", R"({"grid": 3)");
    const Result r = box.run("gen --spec " + box.path("bad.json") + " --out " + box.path("x.json"));
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: spec: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK_FALSE(fs::exists(box.path("x.json")));
  }

  SUBCASE("missing arguments") {
    const Result r = box.run("gen");
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: usage: ", 0) == 0);
  }
}

TEST_CASE("validate") {
  Sandbox box;
  CHECK(box.run("validate --library " + kData + "/example_library.json").code == 0);

  LibraryFile file = read_library_file(kData + "/example_library.json");
  file.gaits[3].step_duration = 0.0;
  write_library_file(file, box.path("broken.json"));
  const Result r = box.run("validate --library " + box.path("broken.json"));
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(r.out)["ok"] == false);
  CHECK(r.err.find("error: validation: ") != std::string::npos);
}

TEST_CASE("stream") {
  Sandbox box;
  const std::string lib_path = kData + "/example_library.json";
  const GaitLibrary lib = load(lib_path);

  SUBCASE("identical inputs give byte-identical traces") {
    const std::string args = "stream --library " + lib_path + " --script " + kData + "/example_script.csv";
    REQUIRE(box.run(args + " --out " + box.path("a.csv")).code == 0);
    REQUIRE(box.run(args + " --out " + box.path("b.csv")).code == 0);
    const std::string a = Sandbox::read(box.path("a.csv"));
    CHECK(a == Sandbox::read(box.path("b.csv")));
    CHECK(read_csv(a).size() == 501);
  }

  SUBCASE("constant velocity at a node equals direct gait sampling") {
    const Gait& g = lib.gait(20);
    std::ostringstream script;
    script << "t,v_x,v_y,heading,dv_x,dv_y\n0," << format_number(g.velocity.x) << ',' << format_number(g.velocity.y)
           << ",0,0,0\n";
    box.write("node.csv", script.str());
    const Result r = box.run("stream --library " + lib_path + " --script " + box.path("node.csv") + " --duration 0.3");
    REQUIRE(r.code == 0);
    const auto samples = samples_from_csv(r.out, lib.n_outputs());
    REQUIRE(samples.size() == 15);
    for (const ReferenceSample& s : samples) {
      if (s.step_index != 0) break;
      CHECK((s.q_nominal - g.curve.eval(s.t / g.step_duration)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("velocity step trace has a bounded-rate transition") {
    const Result r = box.run("stream --library " + lib_path + " --script " + kData + "/example_script.csv");
    REQUIRE(r.code == 0);
    const auto samples = samples_from_csv(r.out, lib.n_outputs());
    const fixture::StreamCheck check = fixture::check_stream(samples);
    CHECK(check.phase_monotone);
    CHECK(check.steps_consistent);
    CHECK(check.max_jump <= 1.5 * fixture::switch_bound(lib, {0.1, 0.0}, {0.4, 0.05}, 0.02));
  }

  SUBCASE("residual width must match the library") {
    box.write("wide.csv", "t,v_x,v_y,heading,dv_x,dv_y,dq0,dq1,dq2\n0,0.1,0,0,0,0,0,0,0\n");
    const Result r = box.run("stream --library " + lib_path + " --script " + box.path("wide.csv"));
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: script: ", 0) == 0);
  }

  SUBCASE("closed-loop trace") {
    const Result r = box.run("stream --library " + lib_path + " --script " + kData +
                             "/example_script.csv --duration 0.1 --plant --gains 40");
    REQUIRE(r.code == 0);
    const auto rows = read_csv(r.out);
    CHECK(rows.front().front() == "t");
    CHECK(rows.front()[1] == "q_des0");
    CHECK(rows.size() == 1 + 5 * 40);
  }
}

TEST_CASE("bench") {
  Sandbox box;
  const Result r = box.run("bench --library " + kData + "/example_library.json --seconds 0.05 --batch 32 --workers 2");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<nlohmann::json> docs;
  while (std::getline(lines, line)) docs.push_back(nlohmann::json::parse(line));
  REQUIRE(docs.size() == 4);
  CHECK(docs[0]["metric"] == "probe");
  CHECK(docs[0]["passed"] == true);
  CHECK(docs[1]["samples_per_second"].get<double>() > 0.0);
  CHECK(docs[2]["batch"] == 32);
  CHECK(docs[3]["batch"] == 1);
}
