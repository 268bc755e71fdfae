#include <doctest.h>

#include <cmath>
#include <vector>

#include "ebp/analyze.hpp"
#include "ebp/engine.hpp"
#include "ebp/error.hpp"

using namespace ebp;

namespace {

struct Path {
  std::vector<double> t{0.0};
  std::vector<std::int64_t> y{0};
};

Path from_moves(const std::vector<int>& moves) {
  Path p;
  for (int m : moves) {
    p.t.push_back(p.t.back() + 1.0);
    p.y.push_back(p.y.back() + m);
  }
  return p;
}

Path simulate(const char* name, std::uint64_t steps, std::uint64_t seed) {
  Path p;
  Simulator sim(builtin_model(name), StartMode::FixedOrigin, seed);
  sim.run(steps, [&](const SamplePoint& s) {
    p.t.push_back(s.t);
    p.y.push_back(s.y);
  });
  return p;
}

ErrorCode error_of(const Path& p, int base = 0) {
  try {
    extract_crossing_tree(p.t, p.y, 3, base);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("path accepted");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("hand-worked crossing tree") {
  // 0 1 0 1 2 | 1 2 1 0 | -1 -2
  const Path p = from_moves({1, -1, 1, 1, -1, 1, -1, -1, -1, -1});
  const ExtractedTree t = extract_crossing_tree(p.t, p.y, 3);
  REQUIRE(t.max_level() >= 1);
  const auto& l1 = t.levels[1];
  REQUIRE(l1.size() == 3);
  CHECK(l1[0].orientation == Orientation::Up);
  CHECK(l1[0].child_count == 4);
  CHECK(t.pattern(1, 0).to_string() == "+-++");
  CHECK(l1[1].orientation == Orientation::Down);
  CHECK(t.pattern(1, 1).to_string() == "-+--");
  CHECK(l1[2].orientation == Orientation::Down);
  CHECK(l1[2].duration() == 2.0);
  CHECK(t.discarded[0] == 0);
  // The level-1 walk 0, 2, 0, -2 never reaches +-4.
  CHECK(t.max_level() == 1);
  CHECK(t.discarded[1] == 3);
}

TEST_CASE("every extracted pattern is admissible") {
  const Path p = simulate("table3-fixed", 50000, 4);
  const ExtractedTree t = extract_crossing_tree(p.t, p.y, 10);
  for (int n = 1; n <= t.max_level(); ++n) {
    double covered = 0.0;
    for (std::size_t i = 0; i < t.levels[n].size(); ++i) {
      const auto& c = t.levels[n][i];
      REQUIRE(validate_pattern(t.pattern(n, i), c.orientation));
      const auto& first = t.levels[n - 1][c.first_child];
      const auto& last = t.levels[n - 1][c.first_child + c.child_count - 1];
      REQUIRE(c.start == first.start);
      REQUIRE(c.end == last.end);
      covered += c.child_count;
    }
    REQUIRE(covered + t.discarded[n - 1] == t.levels[n - 1].size());
  }
}

TEST_CASE("coarser base level") {
  Path p = from_moves({1, 1, -1, 1});
  for (auto& y : p.y) y *= 4;
  const ExtractedTree t = extract_crossing_tree(p.t, p.y, 2, 2);
  CHECK(t.levels[0].size() == 4);
  CHECK(t.levels[1].size() == 1);
  CHECK(error_of(p, 0) == ErrorCode::MalformedPath);
}

TEST_CASE("malformed paths") {
  Path jump = from_moves({1, 1});
  jump.y[2] = 3;
  CHECK(error_of(jump) == ErrorCode::MalformedPath);
  Path offset = from_moves({1});
  offset.y = {1, 2};
  CHECK(error_of(offset) == ErrorCode::MalformedPath);
  Path still = from_moves({1, 1});
  still.t[2] = still.t[1];
  CHECK(error_of(still) == ErrorCode::MalformedPath);
  Path ragged = from_moves({1});
  ragged.t.push_back(5.0);
  CHECK(error_of(ragged) == ErrorCode::MalformedPath);
}

TEST_CASE("estimates on the Brownian builtin") {
  const Path p = simulate("brownian", 200000, 6);
  const EstimateReport r = estimate(extract_crossing_tree(p.t, p.y, 5));
  REQUIRE(r.levels.size() == 5);
  CHECK(within_se(r.pooled_mu_hat.value, 4.0, r.pooled_mu_hat.standard_error));
  CHECK(r.hurst_hat == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.level0_duration[0].value == 1.0);
  for (const auto& l : r.levels) {
    CHECK(l.max_duration_share > 0.0);
    CHECK(l.max_duration_share <= 1.0);
  }
}

TEST_CASE("scale invariance") {
  const ModelSpec m = builtin_model("figure4");
  const Path p = simulate("figure4", 300000, 12);
  const ExtractedTree t = extract_crossing_tree(p.t, p.y, 6);
  const ScaleInvarianceReport r = scale_invariance_check(t, 1, 2, m);
  CHECK(r.pass);
  CHECK(r.expected_ratio == doctest::Approx(spectral_summary(m).mu));
  CHECK(r.log_shift_prediction > 0.0);
  try {
    scale_invariance_check(t, 1, 6, m);
    FAIL("too few crossings accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
  CHECK_THROWS_AS(scale_invariance_check(t, 2, 1, m), Error);
}
