#include <doctest.h>

#include <cmath>
#include <map>

#include "ebp/sizebias.hpp"
#include "ebp/stats.hpp"

using namespace ebp;

namespace {

// p(a) sum_j v^{a(j)} E R(j) for a geometric law with iid weights, by
// explicit summation over the number of excursions and their directions.
double geometric_tilted_size_probability(double p, const Eigen::Vector2d& v, double mean_r,
                                         Orientation parent, int z) {
  // Each excursion contributes v+ + v- regardless of its direction.
  const double excursion_mass = v(0) + v(1);
  const double mass = (z * excursion_mass + 2 * v(index(parent))) * mean_r;
  return p * std::pow(1 - p, z) * mass / v(index(parent));
}

}  // namespace

TEST_CASE("tilted normalizer equals v") {
  for (const auto& name : builtin_names()) {
    if (name == "binary-cascade") continue;
    const ModelSpec m = builtin_model(name);
    const SpectralSummary s = spectral_summary(m);
    const TiltedLaws t(m, s);
    for (Orientation o : kOrientations) CHECK(t.normalizer(o) == doctest::Approx(s.v(o)).epsilon(1e-12));
  }
}

TEST_CASE("tilted table probabilities sum to one") {
  for (const char* name : {"table3", "table3-fixed"}) {
    const ModelSpec m = builtin_model(name);
    const TiltedLaws t(m, spectral_summary(m));
    for (Orientation o : kOrientations) {
      double sum = 0.0;
      for (double p : t.table_probabilities(o)) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("tilted geometric sizes follow the tilted law") {
  const ModelSpec m = builtin_model("skewed");
  const SpectralSummary s = spectral_summary(m);
  const TiltedLaws t(m, s);
  CounterRng structure(1), weights(2);
  Family f;
  for (Orientation parent : kOrientations) {
    const double p = parent == Orientation::Up ? 0.5 : 0.4;
    std::map<int, int> counts;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      t.sample_family(parent, structure, weights, f);
      REQUIRE(validate_pattern(f.pattern, parent));
      ++counts[static_cast<int>(f.pattern.excursion_count())];
    }
    for (int z = 0; z <= 4; ++z) {
      const double expected =
          geometric_tilted_size_probability(p, s.right_v, m.constant_weight(), parent, z);
      const double f_obs = static_cast<double>(counts[z]) / n;
      CAPTURE(z);
      CHECK(within_se(f_obs, expected, std::sqrt(expected * (1 - expected) / n), 4));
      CHECK(t.pattern_probability(parent, f.pattern) >= 0.0);
    }
  }
}

TEST_CASE("spine child selection frequencies") {
  const ModelSpec m = builtin_model("table3-fixed");
  const TiltedLaws t(m, spectral_summary(m));
  CounterRng structure(4), weights(5);
  Family f;
  t.sample_family(Orientation::Up, structure, weights, f);
  double total = 0.0;
  for (std::size_t j = 0; j < f.pattern.size(); ++j) total += t.spine_child_probability(f, j);
  CHECK(total == doctest::Approx(1.0));
  std::vector<int> counts(f.pattern.size(), 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[t.select_spine_child(f, structure)];
  for (std::size_t j = 0; j < f.pattern.size(); ++j) {
    const double p = t.spine_child_probability(f, j);
    CHECK(within_se(static_cast<double>(counts[j]) / n, p, std::sqrt(p * (1 - p) / n), 4));
  }
}

TEST_CASE("spine chains are stochastic with stationary u.v") {
  for (const char* name : {"skewed", "figure4", "table3-fixed"}) {
    const SpectralSummary s = spectral_summary(builtin_model(name));
    const SpineChains c = spine_chains(s, s.m1);
    for (int i = 0; i < 2; ++i) {
      CHECK(c.down.row(i).sum() == doctest::Approx(1.0));
      CHECK(c.up.row(i).sum() == doctest::Approx(1.0));
    }
    CHECK(c.stationary(0) == doctest::Approx(s.u(Orientation::Up) * s.v(Orientation::Up)));
    CHECK((c.stationary * c.down - c.stationary).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c.stationary * c.up - c.stationary).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spinal log moment closed form against sampling") {
  for (const char* name : {"figure4", "table3", "table3-fixed"}) {
    const ModelSpec m = builtin_model(name);
    const TiltedLaws t(m, spectral_summary(m));
    const SpinalLogMoment exact = spinal_log_moment(t);
    const SpinalLogMoment mc = spinal_log_moment_monte_carlo(t, 200000, 11);
    for (int i = 0; i < 2; ++i)
      CHECK(within_se(mc.mean_log[i], exact.mean_log[i], mc.standard_error[i], 4));
  }
}
