#include <doctest.h>

#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ebp/error.hpp"
#include "ebp/model.hpp"
#include "ebp/stats.hpp"

using namespace ebp;

namespace {

OffspringPattern pat(const char* s) { return *OffspringPattern::parse(s); }

ModelSpec geometric_model(double p_up, double p_down, WeightLaw w = {}) {
  return ModelSpec::create(OrientationLaw(GeometricExcursions{p_up, 0.5}, GeometricExcursions{p_down, 0.5}), w);
}

}  // namespace

TEST_CASE("patterns parse and validate") {
  CHECK(pat("++").size() == 2);
  CHECK(pat("+-++").excursion_count() == 1);
  CHECK(pat("-+ +-++").to_string() == "-++-++");
  CHECK_FALSE(OffspringPattern::parse("+-+"));
  CHECK_FALSE(OffspringPattern::parse("++-+"));  // direct pair not last
  CHECK_FALSE(OffspringPattern::parse("+x"));
  CHECK(validate_pattern(pat("+-++"), Orientation::Up));
  CHECK_FALSE(validate_pattern(pat("+-++"), Orientation::Down));
  CHECK(validate_pattern(pat("+---"), Orientation::Down));
  CHECK(pat("+--++-++").count(Orientation::Up) == 5);
}

TEST_CASE("sampled patterns are admissible for their parent") {
  const ModelSpec m = builtin_model("skewed");
  CounterRng rng(3);
  OffspringPattern a;
  for (Orientation parent : kOrientations)
    for (int n = 0; n < 20000; ++n) {
      m.orientation_law().sample(parent, rng, a);
      REQUIRE(validate_pattern(a, parent));
    }
}

TEST_CASE("geometric mean counts match the series") {
  for (double p : {0.3, 0.5, 0.6, 0.8}) {
    const OrientationLaw law = OrientationLaw::symmetric(GeometricExcursions{p, 0.5});
    // E Z+ given Up = 2 + E#excursions, summed directly over the pmf.
    double ez = 0.0;
    for (int z = 0; z < 2000; ++z) ez += z * p * std::pow(1 - p, z);
    const Eigen::Vector2d c = law.mean_counts(Orientation::Up);
    CHECK(c(0) == doctest::Approx(2 + ez).epsilon(1e-12));
    CHECK(c(1) == doctest::Approx(ez).epsilon(1e-12));
  }
}

TEST_CASE("perron system of positive matrices") {
  CounterRng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Matrix2d m;
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = std::exp(4 * rng.uniform() - 2);
    const PerronSystem p = perron(m);
    const double scale = m.cwiseAbs().maxCoeff();
    REQUIRE((m * p.right - p.eigenvalue * p.right).cwiseAbs().maxCoeff() < 1e-12 * scale * 10);
    REQUIRE((p.left * m - p.eigenvalue * p.left).cwiseAbs().maxCoeff() < 1e-12 * scale * 10);
    REQUIRE(p.left.sum() == doctest::Approx(1.0).epsilon(1e-13));
    REQUIRE(p.left.dot(p.right.transpose()) == doctest::Approx(1.0).epsilon(1e-13));
    REQUIRE(p.left.minCoeff() > 0);
    REQUIRE(p.right.minCoeff() > 0);
    const Eigen::Vector2cd ev = m.eigenvalues();
    REQUIRE(p.eigenvalue == doctest::Approx(std::max(ev(0).real(), ev(1).real())).epsilon(1e-12));
  }
}

TEST_CASE("normalized random models conserve mass") {
  CounterRng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const double pu = 0.05 + 0.45 * rng.uniform();
    const double pd = 0.05 + 0.45 * rng.uniform();
    WeightLaw w;
    if (trial % 2)
      w.mode = IidWeights{{WeightDistribution::gamma(0.5 + 3 * rng.uniform(), 1.0),
                           WeightDistribution::gamma(0.5 + 3 * rng.uniform(), 1.0)},
                          true};
    const ModelSpec m = geometric_model(pu, pd, w);
    const SpectralSummary s = spectral_summary(m);
    REQUIRE(s.mu_at_one == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE((s.m1 * s.right_v - s.right_v).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(s.mu == doctest::Approx((s.mu_plus + s.mu_minus) / 2));
    REQUIRE(s.hurst == doctest::Approx(std::log(2.0) / std::log(s.mu)));
    REQUIRE(s.fixed_point_a >= 0.0);
    REQUIRE(s.fixed_point_a <= 1.0);
  }
}

TEST_CASE("closed-form eigenvectors for orientation-independent weights") {
  const SpectralSummary s = spectral_summary(builtin_model("skewed"));
  CHECK(s.u(Orientation::Up) == doctest::Approx(0.5));
  CHECK(s.v(Orientation::Up) == doctest::Approx((s.mu_plus - 2) / (s.mu - 2)));
  CHECK(s.v(Orientation::Down) == doctest::Approx((s.mu_minus - 2) / (s.mu - 2)));
}

TEST_CASE("weight moments against quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  const WeightDistribution g = WeightDistribution::gamma(2.5, 0.7);
  for (double theta : {0.5, 1.0, 1.7}) {
    auto f = [&](double x) {
      return std::pow(x, theta) * std::pow(x, 1.5) * std::exp(-x / 0.7) / (std::tgamma(2.5) * std::pow(0.7, 2.5));
    };
    const double q = gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
    CHECK(g.moment(theta) == doctest::Approx(q).epsilon(1e-9));
    auto fl = [&](double x) { return f(x) * std::log(x); };
    const double ql = gauss_kronrod<double, 61>::integrate(fl, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
    CHECK(g.moment_derivative(theta) == doctest::Approx(ql).epsilon(1e-8));
  }
  const WeightDistribution ln = WeightDistribution::lognormal(-1.0, 0.4);
  CHECK(ln.moment(2.0) == doctest::Approx(std::exp(-2.0 + 2 * 0.16)));
  CHECK(ln.mean_log() == doctest::Approx(-1.0));
  CHECK(WeightDistribution::deterministic(0.25).moment(1.5) == doctest::Approx(0.125));
}

TEST_CASE("weight samplers match their moments") {
  CounterRng rng(5);
  for (const auto& d : {WeightDistribution::gamma(0.4, 2.0), WeightDistribution::gamma(1.0, 0.5),
                        WeightDistribution::gamma(3.0, 0.2), WeightDistribution::lognormal(0.1, 0.5)}) {
    RunningStats s, sl, sb;
    for (int i = 0; i < 200000; ++i) {
      const double x = d.sample(rng);
      s.add(x);
      sl.add(std::log(x));
      sb.add(std::log(d.sample_size_biased(rng)));
    }
    CHECK(within_se(s.mean(), d.mean(), s.standard_error(), 4));
    CHECK(within_se(sl.mean(), d.mean_log(), sl.standard_error(), 4));
    CHECK(within_se(sb.mean(), d.size_biased_mean_log(), sb.standard_error(), 4));
  }
}

TEST_CASE("Monte Carlo M(theta) agrees with the exact matrix") {
  const ModelSpec m = builtin_model("figure4");
  const MThetaEstimate e = m_theta_monte_carlo(m, 1.0, 100000, 9);
  const MTheta x = m_theta(m, 1.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(within_se(e.matrix(i, j), x.matrix(i, j), e.standard_error(i, j), 4));
  CHECK(within_se(e.eigenvalue, 1.0, e.eigenvalue_se, 4));
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(geometric_model(0.0, 0.5), Error);
  CHECK_THROWS_AS(geometric_model(0.5, 1.5), Error);
  PatternTable bad{{pat("+-++")}, {0.7}};
  try {
    ModelSpec::create(OrientationLaw::symmetric(bad), {});
    FAIL("table with mass 0.7 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidModel);
  }
  PatternTable wrong{{pat("+---")}, {1.0}};
  CHECK_THROWS_AS(ModelSpec::create(OrientationLaw(wrong, wrong), {}), Error);
}

TEST_CASE("builtin catalog") {
  for (const auto& name : builtin_names()) CHECK_NOTHROW(builtin_model(name));
  try {
    builtin_model("nope");
    FAIL("unknown model accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownModel);
  }
  try {
    builtin_model("brownian", {{"colour", "red"}});
    FAIL("unknown parameter accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidModel);
  }
  const SpectralSummary f = spectral_summary(builtin_model("figure4"));
  // P(z) = 0.6 * 0.4^z: E z = 2/3, so mu = 2 + 2 * 2/3.
  CHECK(f.mu == doctest::Approx(2 + 4.0 / 3));
}

TEST_CASE("assumption verdicts") {
  CHECK(check_assumptions(builtin_model("brownian")).all_pass());
  CHECK(check_assumptions(builtin_model("figure4")).all_pass());
  const AssumptionReport b = check_assumptions(builtin_model("binary-cascade"));
  CHECK(b.a1.status == CheckStatus::Fail);
  CHECK(b.any_fail());
  // A model with (u, v) = (1, 0) and no override cannot fix the first crossing.
  const ModelSpec degenerate = ModelSpec::create(
      OrientationLaw(GeometricExcursions{0.5, 1.0}, GeometricExcursions{0.5, 0.0}), {});
  try {
    spectral_summary(degenerate);
    FAIL("degenerate first-crossing law accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFirstCrossing);
  }
}
