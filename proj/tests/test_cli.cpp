#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(EBPSIM_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ebpsim-cli-test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("spectral") {
  const Result r = run("spectral --builtin brownian");
  CHECK(r.code == 0);
  CHECK(r.out.find("mu = 4\n") != std::string::npos);
  CHECK(r.out.find("H = 0.5\n") != std::string::npos);
  CHECK(run("spectral --builtin binary-cascade").code == 3);
  CHECK(run("spectral --builtin nope").code == 2);
  CHECK(run("spectral --builtin brownian --param weights=purple").code == 2);
}

TEST_CASE("simulate streams records") {
  const Result r = run("simulate --builtin brownian --steps 3 --seed 1 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("k,t,y,o,d\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
  CHECK(run("simulate --builtin brownian --steps 3").code == 2);
  CHECK(run("simulate --builtin binary-cascade --steps 3 --seed 1").code == 3);
  const Result forced = run("simulate --builtin binary-cascade --steps 3 --seed 1 --force");
  CHECK(forced.code == 0);
}

TEST_CASE("resume continues the same stream") {
  const fs::path snap = scratch("state.json");
  const fs::path a = scratch("a.ndjson"), b = scratch("b.ndjson"), whole = scratch("whole.ndjson");
  REQUIRE(run("simulate --builtin figure4 --random-start --steps 5000 --seed 9 --out " + whole.string()).code == 0);
  REQUIRE(run("simulate --builtin figure4 --random-start --steps 1777 --seed 9 --out " + a.string() +
              " --snapshot " + snap.string())
              .code == 0);
  REQUIRE(run("simulate --resume " + snap.string() + " --steps 3223 --out " + b.string()).code == 0);
  CHECK(slurp(a) + slurp(b) == slurp(whole));
  CHECK(run("simulate --resume " + snap.string() + " --steps 3 --seed 4").code == 2);
  std::ofstream(scratch("junk.json")) << "{\"format\": \"something\"}";
  CHECK(run("simulate --resume " + scratch("junk.json").string() + " --steps 3").code == 2);
}

TEST_CASE("replicas") {
  const fs::path out = scratch("rep.csv");
  REQUIRE(run("simulate --builtin skewed --steps 100 --seed 3 --replicas 3 --format csv --out " + out.string())
              .code == 0);
  for (int r = 0; r < 3; ++r) CHECK(fs::exists(out.string() + "." + std::to_string(r)));
  CHECK(slurp(out.string() + ".0") != slurp(out.string() + ".1"));
}

TEST_CASE("model files") {
  const fs::path good = scratch("good.ini");
  std::ofstream(good) << "[orientation_law]\nfamily = geometric\np = 0.6\n[weight_law]\nmode = iid\nfamily = gamma\n"
                         "shape = 2\n";
  CHECK(run("spectral --model " + good.string()).code == 0);
  const fs::path bad = scratch("bad.ini");
  std::ofstream(bad) << "[orientation_law]\nfamily = geometric\np = two\n";
  CHECK(run("spectral --model " + bad.string()).code == 2);
  CHECK(run("spectral --model " + good.string() + " --builtin brownian").code != 0);
}

TEST_CASE("analyze") {
  const fs::path path = scratch("path.csv");
  REQUIRE(run("simulate --builtin brownian --steps 200000 --seed 2 --format csv --out " + path.string()).code == 0);
  const Result r = run("analyze --in " + path.string() + " --levels 4 --builtin brownian --scale 1 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("level 4:") != std::string::npos);
  CHECK(r.out.find("scale_ratio") != std::string::npos);
  std::ofstream(scratch("broken.csv")) << "k,t,y,o,d\n1,1,3,+,1\n";
  CHECK(run("analyze --in " + scratch("broken.csv").string()).code == 2);
}

TEST_CASE("validate") {
  const Result ok = run("validate --builtin skewed --steps 40000 --trees 2000 --depth 6 --seed 5 --threads 1");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("result: pass") != std::string::npos);
  const Result bad = run(
      "validate --builtin skewed --oracle-builtin brownian --steps 40000 --trees 2000 --depth 6 --seed 5 --threads 1");
  CHECK(bad.code == 4);
  CHECK(run("validate --builtin skewed").code == 2);
}
