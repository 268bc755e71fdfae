#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ebp/engine.hpp"
#include "ebp/error.hpp"
#include "ebp/records.hpp"
#include "ebp/snapshot.hpp"
#include "ebp/stats.hpp"

using namespace ebp;

namespace {

ErrorCode snapshot_error_of(const std::string& text) {
  try {
    load_snapshot(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("snapshot accepted");
  return ErrorCode::IoError;
}

void replace_once(std::string& s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("paths are nearest-neighbour walks with increasing times") {
  for (const auto& name : {"brownian", "figure4", "skewed", "table3", "table3-fixed"})
    for (StartMode mode : {StartMode::FixedOrigin, StartMode::RandomStart}) {
      CAPTURE(name);
      Simulator sim(builtin_model(name), mode, 31);
      std::int64_t y = 0;
      double t = 0.0;
      for (std::uint64_t k = 1; k <= 20000; ++k) {
        const SamplePoint p = sim.next();
        REQUIRE(p.k == k);
        REQUIRE(p.y - y == step(p.orientation));
        REQUIRE(p.duration > 0.0);
        REQUIRE(p.t > t);
        REQUIRE(p.t == doctest::Approx(t + p.duration).epsilon(1e-12));
        y = p.y;
        t = p.t;
        if (k % 997 == 0) CHECK_NOTHROW(Simulator(sim.model(), sim.state()));
      }
    }
}

TEST_CASE("stored families stay consistent with their parents") {
  Simulator sim(builtin_model("table3-fixed"), StartMode::FixedOrigin, 8);
  for (int k = 0; k < 50000; ++k) {
    sim.next();
    const auto& levels = sim.state().levels;
    for (std::size_t n = 0; n + 1 < levels.size(); ++n)
      REQUIRE(validate_pattern(levels[n].family.pattern, levels[n + 1].orientation()));
  }
}

TEST_CASE("fixed origin level-0 orientation matches the top of the stack") {
  Simulator sim(builtin_model("skewed"), StartMode::FixedOrigin, 2);
  const SamplePoint first = sim.next();
  CHECK(first.k == 1);
  CHECK(first.orientation == sim.state().levels.front().orientation());
  CHECK(first.t == doctest::Approx(sim.spectral().v(first.orientation) * 1.0));
}

TEST_CASE("seeds determine the path") {
  auto path = [](std::uint64_t seed) {
    std::string out;
    Simulator sim(builtin_model("figure4"), StartMode::RandomStart, seed);
    sim.run(2000, [&](const SamplePoint& p) { out += format_record(p, RecordFormat::Csv); });
    return out;
  };
  CHECK(path(5) == path(5));
  CHECK(path(5) != path(6));
}

TEST_CASE("unconditioned families have the offspring law") {
  const ModelSpec m = builtin_model("skewed");
  const SpectralSummary s = spectral_summary(m);
  Simulator sim(m, StartMode::FixedOrigin, 13);
  std::array<RunningStats, 2> z;
  sim.set_family_observer([&](std::size_t, const Family& f) {
    z[index(f.pattern.back())].add(static_cast<double>(f.pattern.size()));
  });
  sim.run(300000, [](const SamplePoint&) {});
  CHECK(within_se(z[0].mean(), s.mu_plus, z[0].standard_error(), 4));
  CHECK(within_se(z[1].mean(), s.mu_minus, z[1].standard_error(), 4));
}

TEST_CASE("depth grows logarithmically") {
  Simulator sim(builtin_model("brownian"), StartMode::FixedOrigin, 21);
  sim.run(100000, [](const SamplePoint&) {});
  const double mu = 4.0;
  CHECK(sim.depth() >= 4);
  CHECK(static_cast<double>(sim.depth()) <= 2 * std::log(1e5) / std::log(mu) + 16);
}

TEST_CASE("snapshots restore exactly") {
  for (StartMode mode : {StartMode::FixedOrigin, StartMode::RandomStart}) {
    Simulator a(builtin_model("table3"), mode, 3);
    a.run(1234, [](const SamplePoint&) {});
    const std::string text = save_snapshot(a);
    Simulator b = load_snapshot(text);
    CHECK(save_snapshot(b) == text);
    for (int i = 0; i < 5000; ++i) {
      const SamplePoint p = a.next();
      const SamplePoint q = b.next();
      REQUIRE(p.t == q.t);
      REQUIRE(p.y == q.y);
      REQUIRE(p.duration == q.duration);
    }
  }
  // The first point of a fresh fixed-origin process is still pending.
  Simulator fresh(builtin_model("figure4"), StartMode::FixedOrigin, 4);
  Simulator copy = load_snapshot(save_snapshot(fresh));
  CHECK(copy.next().k == 1);
}

TEST_CASE("corrupted snapshots are rejected") {
  Simulator a(builtin_model("figure4"), StartMode::FixedOrigin, 3);
  a.run(100, [](const SamplePoint&) {});
  const std::string text = save_snapshot(a);
  CHECK(snapshot_error_of("not json") == ErrorCode::SnapshotError);
  CHECK(snapshot_error_of("{}") == ErrorCode::SnapshotError);
  std::string v2 = text;
  replace_once(v2, "\"version\": 1", "\"version\": 2");
  CHECK(snapshot_error_of(v2) == ErrorCode::SnapshotError);
  std::string mode = text;
  replace_once(mode, "fixed-origin", "sideways");
  CHECK(snapshot_error_of(mode) == ErrorCode::SnapshotError);
  // Position outside the family.
  SimulatorState s = a.state();
  s.levels[0].s = 0;
  CHECK_THROWS_AS(Simulator(a.model(), s), Error);
  s = a.state();
  s.levels.back().family.weights.front() = -1.0;
  CHECK_THROWS_AS(Simulator(a.model(), s), Error);
  s = a.state();
  s.spine_weights.pop_back();
  CHECK_THROWS_AS(Simulator(a.model(), s), Error);
}

TEST_CASE("record streams round-trip") {
  Simulator sim(builtin_model("figure4"), StartMode::FixedOrigin, 9);
  std::vector<SamplePoint> points;
  sim.run(500, [&](const SamplePoint& p) { points.push_back(p); });
  for (RecordFormat f : {RecordFormat::Ndjson, RecordFormat::Csv}) {
    std::string text = f == RecordFormat::Csv ? std::string(csv_header()) : std::string();
    for (const auto& p : points) text += format_record(p, f);
    std::istringstream in(text);
    const auto back = read_records(in);
    REQUIRE(back.size() == points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      REQUIRE(back[i].k == points[i].k);
      REQUIRE(back[i].t == points[i].t);
      REQUIRE(back[i].y == points[i].y);
      REQUIRE(back[i].orientation == points[i].orientation);
      REQUIRE(back[i].duration == points[i].duration);
    }
  }
  std::istringstream bad("k,t,y,o,d\n1,1,1,+,1\n2,2,x,+,1\n");
  try {
    read_records(bad);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedPath);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  CHECK(parse_record_format("csv") == RecordFormat::Csv);
  CHECK_THROWS_AS(parse_record_format("xml"), Error);
}
