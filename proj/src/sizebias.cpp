#include "ebp/sizebias.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ebp/error.hpp"

namespace ebp {

namespace {

// E R for a branch under an iid or constant law.
double iid_mean(const ModelSpec& model, Orientation parent) {
  const auto& mode = model.weight_law().mode;
  if (std::holds_alternative<ConstantReciprocalMu>(mode)) return model.constant_weight();
  return std::get<IidWeights>(mode).by_parent[index(parent)].mean();
}

double parametric_probability(const ExcursionLaw& law, const OffspringPattern& a) {
  std::size_t updown = 0;
  for (PairKind k : a.excursions()) updown += k == PairKind::UpDown;
  const std::size_t z = a.excursion_count();
  const std::size_t downup = z - updown;
  auto directions = [&](double q) {
    return std::pow(q, static_cast<double>(updown)) * std::pow(1.0 - q, static_cast<double>(downup));
  };
  if (auto* g = std::get_if<GeometricExcursions>(&law))
    return g->stop_probability * std::pow(1.0 - g->stop_probability, static_cast<double>(z)) *
           directions(g->updown_probability);
  const auto& c = std::get<ConstantExcursions>(law);
  return z == c.count ? directions(c.updown_probability) : 0.0;
}

}  // namespace

TiltedLaws::TiltedLaws(const ModelSpec& model, const SpectralSummary& spectral)
    : model_(&model), spectral_(spectral) {
  if (!(spectral_.v(Orientation::Up) > 0.0 && spectral_.v(Orientation::Down) > 0.0))
    throw Error(ErrorCode::InvalidModel, "size-biasing needs a strictly positive right eigenvector");
  const auto& law = model.orientation_law();
  const auto* table_weights = std::get_if<PerPatternWeights>(&model.weight_law().mode);
  const double v_sum = spectral_.v(Orientation::Up) + spectral_.v(Orientation::Down);

  for (Orientation parent : kOrientations) {
    const int i = index(parent);
    if (const auto* t = std::get_if<PatternTable>(&law.law(parent))) {
      std::vector<double> mass(t->patterns.size());
      double total = 0.0;
      for (std::size_t r = 0; r < t->patterns.size(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < t->patterns[r].size(); ++j) {
          const double mean = table_weights ? table_weights->by_parent[i][r][j] : iid_mean(model, parent);
          s += spectral_.v(t->patterns[r][j]) * mean;
        }
        mass[r] = t->probabilities[r] * s;
        total += mass[r];
      }
      for (double& m : mass) m /= total;
      table_[i] = std::move(mass);
      normalizer_[i] = total;
      continue;
    }
    double mean_excursions = 0.0;
    if (auto* g = std::get_if<GeometricExcursions>(&law.law(parent))) {
      mean_excursions = (1.0 - g->stop_probability) / g->stop_probability;
      const double c0 = 2.0 * spectral_.v(parent);
      geometric_mix_[i] = c0 / (c0 + v_sum * mean_excursions);
    } else {
      mean_excursions = std::get<ConstantExcursions>(law.law(parent)).count;
    }
    normalizer_[i] = iid_mean(model, parent) * (2.0 * spectral_.v(parent) + v_sum * mean_excursions);
  }
}

double TiltedLaws::pattern_probability(Orientation parent, const OffspringPattern& a) const {
  if (!validate_pattern(a, parent)) return 0.0;
  const auto& law = model_->orientation_law().law(parent);
  if (const auto* t = std::get_if<PatternTable>(&law)) {
    double p = 0.0;
    for (std::size_t r = 0; r < t->patterns.size(); ++r)
      if (t->patterns[r] == a) p += table_[index(parent)][r];
    return p;
  }
  double s = 0.0;
  for (Orientation o : a.orientations()) s += spectral_.v(o);
  return parametric_probability(law, a) * iid_mean(*model_, parent) * s / normalizer_[index(parent)];
}

void TiltedLaws::sample_family(Orientation parent, CounterRng& structure, CounterRng& weights,
                               Family& out) const {
  const auto& law = model_->orientation_law().law(parent);
  int row = -1;
  if (const auto* t = std::get_if<PatternTable>(&law)) {
    const auto& probs = table_[index(parent)];
    const double u = structure.uniform();
    double acc = 0.0;
    row = static_cast<int>(probs.size()) - 1;
    for (std::size_t r = 0; r < probs.size(); ++r) {
      acc += probs[r];
      if (u < acc) {
        row = static_cast<int>(r);
        break;
      }
    }
    out.pattern = t->patterns[static_cast<std::size_t>(row)];
  } else if (const auto* g = std::get_if<GeometricExcursions>(&law)) {
    std::uint32_t z = 0;
    if (structure.bernoulli(geometric_mix_[index(parent)]))
      z = geometric_failures(structure, g->stop_probability);
    else
      z = 1 + geometric_failures(structure, g->stop_probability) +
          geometric_failures(structure, g->stop_probability);
    out.pattern.reset(z);
    for (std::uint32_t e = 0; e < z; ++e) out.pattern.push_excursion(structure.bernoulli(g->updown_probability));
    out.pattern.push_direct(parent);
  } else {
    model_->orientation_law().sample(parent, structure, out.pattern);
  }

  const auto& mode = model_->weight_law().mode;
  const std::size_t z = out.pattern.size();
  if (const auto* iid = std::get_if<IidWeights>(&mode)) {
    const auto& d = iid->by_parent[index(parent)];
    double total = 0.0;
    for (Orientation o : out.pattern.orientations()) total += spectral_.v(o);
    const double u = weights.uniform() * total;
    std::size_t slot = z - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < z; ++j) {
      acc += spectral_.v(out.pattern[j]);
      if (u < acc) {
        slot = j;
        break;
      }
    }
    out.weights.resize(z);
    for (std::size_t j = 0; j < z; ++j) out.weights[j] = j == slot ? d.sample_size_biased(weights) : d.sample(weights);
  } else {
    model_->draw_weights(parent, row, z, weights, out.weights);
  }
}

double TiltedLaws::spine_child_probability(const Family& f, std::size_t j) const {
  double total = 0.0;
  for (std::size_t k = 0; k < f.pattern.size(); ++k) total += spectral_.v(f.pattern[k]) * f.weights[k];
  return spectral_.v(f.pattern[j]) * f.weights[j] / total;
}

std::size_t TiltedLaws::select_spine_child(const Family& f, CounterRng& structure) const {
  double total = 0.0;
  for (std::size_t k = 0; k < f.pattern.size(); ++k) total += spectral_.v(f.pattern[k]) * f.weights[k];
  const double u = structure.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < f.pattern.size(); ++k) {
    acc += spectral_.v(f.pattern[k]) * f.weights[k];
    if (u < acc) return k;
  }
  return f.pattern.size() - 1;
}

SpineChains spine_chains(const SpectralSummary& spectral, const Eigen::Matrix2d& m1) {
  SpineChains c;
  const Eigen::Vector2d v = spectral.right_v;
  const Eigen::Vector2d u = spectral.left_u.transpose();
  c.down = v.cwiseInverse().asDiagonal() * m1 * v.asDiagonal();
  c.up = u.cwiseInverse().asDiagonal() * m1.transpose() * u.asDiagonal();
  c.stationary = u.cwiseProduct(v).transpose();
  c.stationary /= c.stationary.sum();
  return c;
}

SpinalLogMoment spinal_log_moment(const TiltedLaws& tilted) {
  const ModelSpec& model = tilted.model();
  const auto& mode = model.weight_law().mode;
  SpinalLogMoment out;
  for (Orientation parent : kOrientations) {
    const int i = index(parent);
    if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
      out.mean_log[i] = std::log(model.constant_weight());
    } else if (const auto* iid = std::get_if<IidWeights>(&mode)) {
      out.mean_log[i] = iid->by_parent[i].size_biased_mean_log();
    } else {
      const auto& rows = std::get<PerPatternWeights>(mode).by_parent[i];
      const auto& t = std::get<PatternTable>(model.orientation_law().law(parent));
      double num = 0.0;
      double den = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < rows[r].size(); ++j) {
          const double w = t.probabilities[r] * tilted.spectral().v(t.patterns[r][j]) * rows[r][j];
          num += w * std::log(rows[r][j]);
          den += w;
        }
      out.mean_log[i] = num / den;
    }
  }
  return out;
}

SpinalLogMoment spinal_log_moment_monte_carlo(const TiltedLaws& tilted, std::size_t draws,
                                              std::uint64_t seed) {
  CounterRng structure = CounterRng::stream(seed, 0);
  CounterRng weights = CounterRng::stream(seed, 1);
  SpinalLogMoment out;
  out.closed_form = false;
  Family f;
  for (Orientation parent : kOrientations) {
    RunningStats s;
    for (std::size_t n = 0; n < draws; ++n) {
      tilted.sample_family(parent, structure, weights, f);
      s.add(std::log(f.weights[tilted.select_spine_child(f, structure)]));
    }
    out.mean_log[index(parent)] = s.mean();
    out.standard_error[index(parent)] = s.standard_error();
  }
  return out;
}

AssumptionCheck check_assumption4(const TiltedLaws& tilted, const SpineChains& chains) {
  const SpinalLogMoment m = spinal_log_moment(tilted);
  AssumptionCheck c;
  c.value = chains.stationary(0) * m.mean_log[0] + chains.stationary(1) * m.mean_log[1];
  c.tolerance = 0.0;
  if (!std::isfinite(c.value)) {
    c.status = CheckStatus::Unverifiable;
    c.evidence = "spinal log-weight moment is not finite";
    return c;
  }
  c.status = c.value < 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  c.evidence = fmt::format("u+v+ E log R+ + u-v- E log R- = {:.6g} * {:.6g} + {:.6g} * {:.6g} = {:.6g} (closed form)",
                           chains.stationary(0), m.mean_log[0], chains.stationary(1), m.mean_log[1], c.value);
  return c;
}

}  // namespace ebp
