#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "ebp/error.hpp"
#include "ebp/model.hpp"
#include "ebp/sizebias.hpp"

namespace ebp {

std::string_view to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Unverifiable: return "unverifiable";
  }
  return "?";
}

bool AssumptionReport::any_fail() const noexcept {
  for (const auto* c : {&a1, &a2, &a3, &a4})
    if (c->status == CheckStatus::Fail) return true;
  return false;
}

bool AssumptionReport::all_pass() const noexcept {
  for (const auto* c : {&a1, &a2, &a3, &a4})
    if (c->status != CheckStatus::Pass) return false;
  return true;
}

namespace {

double mu_prime_closed_form(const ModelSpec& model, double mu) {
  const auto& mode = model.weight_law().mode;
  if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
    const double c = model.constant_weight();
    return mu * c * std::log(c);
  }
  return mu * std::get<IidWeights>(mode).by_parent[0].moment_derivative(1.0);
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model) {
  AssumptionReport r;
  r.warnings = model.warnings();
  const auto& law = model.orientation_law();
  r.mu_plus = law.mean_size(Orientation::Up);
  r.mu_minus = law.mean_size(Orientation::Down);
  const double mu = 0.5 * (r.mu_plus + r.mu_minus);

  r.a1.value = std::min(r.mu_plus, r.mu_minus);
  r.a1.tolerance = 0.0;
  r.a1.status = r.mu_plus > 2.0 && r.mu_minus > 2.0 ? CheckStatus::Pass : CheckStatus::Fail;
  r.a1.evidence = fmt::format("mu+ = {:.17g}, mu- = {:.17g}; both must exceed 2", r.mu_plus, r.mu_minus);

  // Assumption 2.
  r.mu_at_one = m_theta(model, 1.0).perron.eigenvalue;
  r.conservation_residual = r.mu_at_one - 1.0;
  if (model.weights_orientation_independent() && mu > 2.0) {
    r.mu_prime_at_one = mu_prime_closed_form(model, mu);
    r.mu_prime_closed_form = true;
  } else {
    const double h = kFiniteDifferenceStep;
    r.mu_prime_at_one =
        (m_theta(model, 1.0 + h).perron.eigenvalue - m_theta(model, 1.0 - h).perron.eigenvalue) / (2.0 * h);
  }
  std::optional<double> delta_ok;
  for (double delta : kDeltaGrid) {
    double value = std::numeric_limits<double>::infinity();
    try {
      value = m_theta(model, delta).perron.eigenvalue;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfiniteMoment) throw;
    }
    r.delta_grid.emplace_back(delta, value);
    if (!delta_ok && value < 1.0) delta_ok = delta;
  }
  r.a2.value = r.mu_prime_at_one;
  r.a2.tolerance = kConservationTolerance;
  const std::string derivative = r.mu_prime_closed_form ? "closed form" : "central difference, step 1e-4";
  if (std::abs(r.conservation_residual) > kConservationTolerance || !(r.mu_prime_at_one < 0.0)) {
    r.a2.status = CheckStatus::Fail;
    r.a2.evidence = fmt::format("mu(1) = {:.17g} (residual {:.3g}, tolerance {:g}); mu'(1) = {:.6g} ({})",
                                r.mu_at_one, r.conservation_residual, kConservationTolerance,
                                r.mu_prime_at_one, derivative);
  } else if (!delta_ok) {
    r.a2.status = CheckStatus::Unverifiable;
    r.a2.evidence = fmt::format("mu(1) = 1 and mu'(1) = {:.6g} < 0, but mu(delta) >= 1 on the whole grid",
                                r.mu_prime_at_one);
  } else {
    r.a2.status = CheckStatus::Pass;
    r.a2.evidence = fmt::format("mu(1) = {:.17g} (residual {:.3g}); mu'(1) = {:.6g} ({}); mu({:g}) < 1",
                                r.mu_at_one, r.conservation_residual, r.mu_prime_at_one, derivative, *delta_ok);
  }

  // Assumption 3, on the first-crossing chain.
  const double u = law.first_up_probability(Orientation::Up);
  const double v = law.first_up_probability(Orientation::Down);
  const double log_up = model.mean_log_first_weight(Orientation::Up);
  const double log_down = model.mean_log_first_weight(Orientation::Down);
  r.a3.tolerance = 0.0;
  if (u == 1.0 || v == 0.0) {
    bool ok = true;
    std::string parts;
    double worst = -std::numeric_limits<double>::infinity();
    if (u == 1.0) {
      ok = ok && log_up < 0.0;
      worst = std::max(worst, log_up);
      parts += fmt::format("u = 1: E log R(1)|+ = {:.6g}; ", log_up);
    }
    if (v == 0.0) {
      ok = ok && log_down < 0.0;
      worst = std::max(worst, log_down);
      parts += fmt::format("v = 0: E log R(1)|- = {:.6g}; ", log_down);
    }
    r.a3.value = worst;
    r.a3.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    r.a3.evidence = parts + "each must be negative";
  } else {
    r.a3.value = log_up / (1.0 - u) + log_down / v;
    r.a3.status = r.a3.value < 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
    r.a3.evidence = fmt::format("E log R(1)|+ / (1 - u) + E log R(1)|- / v = {:.6g} / {:.6g} + {:.6g} / {:.6g} = {:.6g}",
                                log_up, 1.0 - u, log_down, v, r.a3.value);
  }
  if (!std::isfinite(r.a3.value)) {
    r.a3.status = CheckStatus::Unverifiable;
    r.a3.evidence += " (not finite)";
  }

  // Assumption 4 needs the spectral system; degenerate first-crossing laws
  // without an override leave it undecided.
  try {
    const SpectralSummary s = spectral_summary(model);
    if (!(s.v(Orientation::Up) > 0.0 && s.v(Orientation::Down) > 0.0)) {
      r.a4.status = CheckStatus::Unverifiable;
      r.a4.evidence = "right eigenvector of M(1) is not strictly positive";
    } else {
      const TiltedLaws tilted(model, s);
      r.a4 = check_assumption4(tilted, spine_chains(s, s.m1));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFirstCrossing) throw;
    r.a4.status = CheckStatus::Unverifiable;
    r.a4.evidence = e.what();
  }
  return r;
}

}  // namespace ebp
