#include "ebp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <fmt/format.h>

#include "ebp/error.hpp"
#include "ebp/stats.hpp"

namespace ebp {

std::optional<Orientation> orientation_from_symbol(char c) noexcept {
  if (c == '+') return Orientation::Up;
  if (c == '-') return Orientation::Down;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// OffspringPattern

OffspringPattern::OffspringPattern(std::span<const PairKind> excursions, PairKind direct) {
  reset(excursions.size());
  for (PairKind k : excursions) {
    if (k != PairKind::UpDown && k != PairKind::DownUp)
      throw Error(ErrorCode::InvalidModel, "excursion pair must be up-down or down-up");
    push_excursion(k == PairKind::UpDown);
  }
  if (direct == PairKind::UpUp)
    push_direct(Orientation::Up);
  else if (direct == PairKind::DownDown)
    push_direct(Orientation::Down);
  else
    throw Error(ErrorCode::InvalidModel, "direct pair must be up-up or down-down");
}

std::optional<OffspringPattern> OffspringPattern::from_orientations(std::span<const Orientation> seq) {
  if (seq.size() < 2 || seq.size() % 2 != 0) return std::nullopt;
  const std::size_t pairs = seq.size() / 2;
  for (std::size_t p = 0; p + 1 < pairs; ++p)
    if (seq[2 * p] == seq[2 * p + 1]) return std::nullopt;
  if (seq[seq.size() - 2] != seq.back()) return std::nullopt;
  OffspringPattern out;
  out.seq_.assign(seq.begin(), seq.end());
  return out;
}

std::optional<OffspringPattern> OffspringPattern::parse(std::string_view text) {
  std::vector<Orientation> seq;
  for (char c : text) {
    if (c == ' ' || c == '\t') continue;
    auto o = orientation_from_symbol(c);
    if (!o) return std::nullopt;
    seq.push_back(*o);
  }
  return from_orientations(seq);
}

std::vector<PairKind> OffspringPattern::excursions() const {
  std::vector<PairKind> out;
  for (std::size_t p = 0; p < excursion_count(); ++p)
    out.push_back(seq_[2 * p] == Orientation::Up ? PairKind::UpDown : PairKind::DownUp);
  return out;
}

PairKind OffspringPattern::direct() const noexcept {
  return seq_.back() == Orientation::Up ? PairKind::UpUp : PairKind::DownDown;
}

std::size_t OffspringPattern::count(Orientation o) const noexcept {
  return static_cast<std::size_t>(std::count(seq_.begin(), seq_.end(), o));
}

std::string OffspringPattern::to_string() const {
  std::string s;
  s.reserve(seq_.size());
  for (Orientation o : seq_) s.push_back(symbol(o));
  return s;
}

bool validate_pattern(std::span<const Orientation> seq, Orientation parent) noexcept {
  if (seq.size() < 2 || seq.size() % 2 != 0) return false;
  for (std::size_t p = 0; p + 2 < seq.size(); p += 2)
    if (seq[p] == seq[p + 1]) return false;
  return seq[seq.size() - 2] == parent && seq.back() == parent;
}

// ---------------------------------------------------------------------------
// OrientationLaw

namespace {

void validate_law(const ExcursionLaw& law, Orientation parent) {
  auto probability = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidModel, fmt::format("{} must lie in [0, 1], got {}", what, p));
  };
  if (auto* g = std::get_if<GeometricExcursions>(&law)) {
    if (!(g->stop_probability > 0.0 && g->stop_probability <= 1.0))
      throw Error(ErrorCode::InvalidModel,
                  fmt::format("geometric parameter must lie in (0, 1], got {}", g->stop_probability));
    probability(g->updown_probability, "excursion direction probability");
  } else if (auto* c = std::get_if<ConstantExcursions>(&law)) {
    probability(c->updown_probability, "excursion direction probability");
  } else {
    const auto& t = std::get<PatternTable>(law);
    if (t.patterns.empty() || t.patterns.size() != t.probabilities.size())
      throw Error(ErrorCode::InvalidModel, "pattern table must be non-empty with one probability per row");
    double total = 0.0;
    for (std::size_t r = 0; r < t.patterns.size(); ++r) {
      if (!validate_pattern(t.patterns[r], parent))
        throw Error(ErrorCode::InvalidModel,
                    fmt::format("pattern {} is not admissible for parent {}", t.patterns[r].to_string(),
                                symbol(parent)));
      probability(t.probabilities[r], "pattern probability");
      total += t.probabilities[r];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorCode::InvalidModel,
                  fmt::format("pattern probabilities for parent {} sum to {}", symbol(parent), total));
  }
}

PatternTable mirror(const PatternTable& t) {
  PatternTable out;
  out.probabilities = t.probabilities;
  for (const auto& p : t.patterns) {
    std::vector<Orientation> seq;
    for (Orientation o : p.orientations()) seq.push_back(flip(o));
    out.patterns.push_back(*OffspringPattern::from_orientations(seq));
  }
  return out;
}

}  // namespace

OrientationLaw::OrientationLaw(ExcursionLaw up, ExcursionLaw down)
    : laws_{std::move(up), std::move(down)} {
  validate_law(laws_[0], Orientation::Up);
  validate_law(laws_[1], Orientation::Down);
}

OrientationLaw OrientationLaw::symmetric(const ExcursionLaw& up) {
  if (auto* t = std::get_if<PatternTable>(&up)) return OrientationLaw(up, mirror(*t));
  return OrientationLaw(up, up);
}

double OrientationLaw::mean_size(Orientation parent) const noexcept {
  return mean_counts(parent).sum();
}

Eigen::Vector2d OrientationLaw::mean_counts(Orientation parent) const noexcept {
  double excursions = 0.0;
  const auto& law = laws_[index(parent)];
  if (auto* g = std::get_if<GeometricExcursions>(&law)) {
    excursions = (1.0 - g->stop_probability) / g->stop_probability;
  } else if (auto* c = std::get_if<ConstantExcursions>(&law)) {
    excursions = static_cast<double>(c->count);
  } else {
    const auto& t = std::get<PatternTable>(law);
    Eigen::Vector2d m = Eigen::Vector2d::Zero();
    for (std::size_t r = 0; r < t.patterns.size(); ++r) {
      m(0) += t.probabilities[r] * static_cast<double>(t.patterns[r].count(Orientation::Up));
      m(1) += t.probabilities[r] * static_cast<double>(t.patterns[r].count(Orientation::Down));
    }
    return m;
  }
  Eigen::Vector2d m(excursions, excursions);
  m(index(parent)) += 2.0;
  return m;
}

double OrientationLaw::first_up_probability(Orientation parent) const noexcept {
  const auto& law = laws_[index(parent)];
  const double direct_up = parent == Orientation::Up ? 1.0 : 0.0;
  if (auto* g = std::get_if<GeometricExcursions>(&law)) {
    const double p = g->stop_probability;
    return p * direct_up + (1.0 - p) * g->updown_probability;
  }
  if (auto* c = std::get_if<ConstantExcursions>(&law))
    return c->count == 0 ? direct_up : c->updown_probability;
  const auto& t = std::get<PatternTable>(law);
  double s = 0.0;
  for (std::size_t r = 0; r < t.patterns.size(); ++r)
    if (t.patterns[r].front() == Orientation::Up) s += t.probabilities[r];
  return s;
}

bool OrientationLaw::always_two(Orientation parent) const noexcept {
  const auto& law = laws_[index(parent)];
  if (auto* g = std::get_if<GeometricExcursions>(&law)) return g->stop_probability >= 1.0;
  if (auto* c = std::get_if<ConstantExcursions>(&law)) return c->count == 0;
  const auto& t = std::get<PatternTable>(law);
  for (std::size_t r = 0; r < t.patterns.size(); ++r)
    if (t.probabilities[r] > 0.0 && t.patterns[r].size() != 2) return false;
  return true;
}

int OrientationLaw::sample(Orientation parent, CounterRng& rng, OffspringPattern& out) const {
  const auto& law = laws_[index(parent)];
  if (auto* g = std::get_if<GeometricExcursions>(&law)) {
    const std::uint32_t z = geometric_failures(rng, g->stop_probability);
    out.reset(z);
    for (std::uint32_t e = 0; e < z; ++e) out.push_excursion(rng.bernoulli(g->updown_probability));
    out.push_direct(parent);
    return -1;
  }
  if (auto* c = std::get_if<ConstantExcursions>(&law)) {
    out.reset(c->count);
    for (std::uint32_t e = 0; e < c->count; ++e) out.push_excursion(rng.bernoulli(c->updown_probability));
    out.push_direct(parent);
    return -1;
  }
  const auto& t = std::get<PatternTable>(law);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t row = t.patterns.size() - 1;
  for (std::size_t r = 0; r < t.patterns.size(); ++r) {
    acc += t.probabilities[r];
    if (u < acc) {
      row = r;
      break;
    }
  }
  out = t.patterns[row];
  return static_cast<int>(row);
}

// ---------------------------------------------------------------------------
// WeightDistribution

std::string_view to_string(WeightFamily f) noexcept {
  switch (f) {
    case WeightFamily::Deterministic: return "deterministic";
    case WeightFamily::Gamma: return "gamma";
    case WeightFamily::Lognormal: return "lognormal";
  }
  return "?";
}

double WeightDistribution::moment(double theta) const {
  switch (family) {
    case WeightFamily::Deterministic:
      return std::pow(first, theta);
    case WeightFamily::Gamma:
      if (theta <= -first)
        throw Error(ErrorCode::InfiniteMoment,
                    fmt::format("gamma(shape {}) has no moment of order {}", first, theta));
      return std::pow(second, theta) * std::exp(std::lgamma(first + theta) - std::lgamma(first));
    case WeightFamily::Lognormal:
      return std::exp(theta * first + 0.5 * theta * theta * second * second);
  }
  return 0.0;
}

double WeightDistribution::moment_derivative(double theta) const {
  switch (family) {
    case WeightFamily::Deterministic:
      return std::pow(first, theta) * std::log(first);
    case WeightFamily::Gamma:
      return moment(theta) * (std::log(second) + boost::math::digamma(first + theta));
    case WeightFamily::Lognormal:
      return moment(theta) * (first + theta * second * second);
  }
  return 0.0;
}

double WeightDistribution::mean_log() const noexcept {
  switch (family) {
    case WeightFamily::Deterministic: return std::log(first);
    case WeightFamily::Gamma: return boost::math::digamma(first) + std::log(second);
    case WeightFamily::Lognormal: return first;
  }
  return 0.0;
}

double WeightDistribution::size_biased_mean_log() const noexcept {
  switch (family) {
    case WeightFamily::Deterministic: return std::log(first);
    // s^k e^{-s/scale} tilts gamma(k) to gamma(k + 1).
    case WeightFamily::Gamma: return boost::math::digamma(first + 1.0) + std::log(second);
    case WeightFamily::Lognormal: return first + second * second;
  }
  return 0.0;
}

double WeightDistribution::sample(CounterRng& rng) const noexcept {
  switch (family) {
    case WeightFamily::Deterministic: return first;
    case WeightFamily::Gamma: return gamma_variate(rng, first, second);
    case WeightFamily::Lognormal: return std::exp(first + second * standard_normal(rng));
  }
  return 0.0;
}

double WeightDistribution::sample_size_biased(CounterRng& rng) const noexcept {
  switch (family) {
    case WeightFamily::Deterministic: return first;
    case WeightFamily::Gamma: return gamma_variate(rng, first + 1.0, second);
    case WeightFamily::Lognormal:
      return std::exp(first + second * second + second * standard_normal(rng));
  }
  return 0.0;
}

WeightDistribution WeightDistribution::scaled(double c) const noexcept {
  switch (family) {
    case WeightFamily::Deterministic: return deterministic(first * c);
    case WeightFamily::Gamma: return gamma(first, second * c);
    case WeightFamily::Lognormal: return lognormal(first + std::log(c), second);
  }
  return *this;
}

// ---------------------------------------------------------------------------
// ModelSpec

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void validate_distribution(const WeightDistribution& d) {
  bool ok = false;
  switch (d.family) {
    case WeightFamily::Deterministic: ok = positive_finite(d.first); break;
    case WeightFamily::Gamma: ok = positive_finite(d.first) && positive_finite(d.second); break;
    case WeightFamily::Lognormal: ok = std::isfinite(d.first) && std::isfinite(d.second) && d.second >= 0.0; break;
  }
  if (!ok)
    throw Error(ErrorCode::InvalidModel,
                fmt::format("invalid {} weight parameters ({}, {})", to_string(d.family), d.first, d.second));
}

}  // namespace

ModelSpec ModelSpec::create(OrientationLaw orientation, WeightLaw weights,
                            std::optional<double> first_crossing_override, std::string name) {
  ModelSpec m(std::move(orientation), std::move(weights));
  m.name_ = std::move(name);
  if (first_crossing_override) {
    if (!(*first_crossing_override >= 0.0 && *first_crossing_override <= 1.0))
      throw Error(ErrorCode::InvalidModel, "first-crossing probability must lie in [0, 1]");
    m.override_ = first_crossing_override;
  }

  const double mu = 0.5 * (m.orientation_.mean_size(Orientation::Up) +
                           m.orientation_.mean_size(Orientation::Down));
  m.straight_line_ = m.orientation_.always_two(Orientation::Up) &&
                     m.orientation_.always_two(Orientation::Down);
  if (m.straight_line_)
    m.warnings_.push_back("degenerate straight-line process: every crossing has exactly two subcrossings");

  auto& mode = m.weights_.mode;
  if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
    m.constant_weight_ = 1.0 / mu;
  } else if (auto* iid = std::get_if<IidWeights>(&mode)) {
    if (!iid->orientation_dependent) iid->by_parent[1] = iid->by_parent[0];
    for (const auto& d : iid->by_parent) validate_distribution(d);
    if (m.weights_.normalize) {
      const double scale = 1.0 / m_theta(m, 1.0).perron.eigenvalue;
      for (auto& d : iid->by_parent) d = d.scaled(scale);
      m.normalization_ = scale;
    }
    if (iid->by_parent[0].family == WeightFamily::Deterministic && iid->by_parent[0] == iid->by_parent[1])
      m.constant_weight_ = iid->by_parent[0].first;
  } else {
    auto& table = std::get<PerPatternWeights>(mode);
    for (Orientation parent : kOrientations) {
      const auto* patterns = std::get_if<PatternTable>(&m.orientation_.law(parent));
      if (!patterns)
        throw Error(ErrorCode::InvalidModel, "per-pattern weights require a pattern-table orientation law");
      const auto& rows = table.by_parent[index(parent)];
      if (rows.size() != patterns->patterns.size())
        throw Error(ErrorCode::InvalidModel,
                    fmt::format("parent {}: {} weight rows for {} patterns", symbol(parent), rows.size(),
                                patterns->patterns.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != patterns->patterns[r].size())
          throw Error(ErrorCode::InvalidModel,
                      fmt::format("pattern {} has {} entries but {} weights",
                                  patterns->patterns[r].to_string(), patterns->patterns[r].size(),
                                  rows[r].size()));
        for (double w : rows[r])
          if (!positive_finite(w))
            throw Error(ErrorCode::InvalidModel, fmt::format("weight {} is not positive and finite", w));
      }
    }
    if (m.weights_.normalize) {
      const double scale = 1.0 / m_theta(m, 1.0).perron.eigenvalue;
      for (auto& rows : table.by_parent)
        for (auto& row : rows)
          for (double& w : row) w *= scale;
      m.normalization_ = scale;
    }
  }
  return m;
}

bool ModelSpec::constant_weights() const noexcept { return constant_weight_ > 0.0; }

bool ModelSpec::weights_orientation_independent() const noexcept {
  if (std::holds_alternative<ConstantReciprocalMu>(weights_.mode)) return true;
  if (auto* iid = std::get_if<IidWeights>(&weights_.mode)) return iid->by_parent[0] == iid->by_parent[1];
  return false;
}

bool ModelSpec::iid_weights() const noexcept {
  return !std::holds_alternative<PerPatternWeights>(weights_.mode);
}

void ModelSpec::draw_weights(Orientation parent, int row, std::size_t z, CounterRng& rng,
                             std::vector<double>& out) const {
  if (std::holds_alternative<ConstantReciprocalMu>(weights_.mode)) {
    out.assign(z, constant_weight_);
  } else if (auto* iid = std::get_if<IidWeights>(&weights_.mode)) {
    const auto& d = iid->by_parent[index(parent)];
    out.resize(z);
    for (double& w : out) w = d.sample(rng);
  } else {
    const auto& rows = std::get<PerPatternWeights>(weights_.mode).by_parent[index(parent)];
    const auto& r = rows[static_cast<std::size_t>(row)];
    out.assign(r.begin(), r.end());
  }
}

void ModelSpec::draw_family(Orientation parent, CounterRng& structure, CounterRng& weights,
                            Family& out) const {
  const int row = orientation_.sample(parent, structure, out.pattern);
  draw_weights(parent, row, out.pattern.size(), weights, out.weights);
}

void ModelSpec::draw_family_first_child(Orientation parent, Orientation first, CounterRng& structure,
                                        CounterRng& weights, Family& out) const {
  for (std::uint64_t attempt = 0; attempt < kRejectionCap; ++attempt) {
    const int row = orientation_.sample(parent, structure, out.pattern);
    if (out.pattern.front() == first) {
      draw_weights(parent, row, out.pattern.size(), weights, out.weights);
      return;
    }
  }
  throw Error(ErrorCode::RejectionCapExceeded,
              fmt::format("no family for parent {} with first child {} after {} attempts", symbol(parent),
                          symbol(first), kRejectionCap));
}

double ModelSpec::mean_log_first_weight(Orientation parent) const {
  if (std::holds_alternative<ConstantReciprocalMu>(weights_.mode)) return std::log(constant_weight_);
  if (auto* iid = std::get_if<IidWeights>(&weights_.mode)) return iid->by_parent[index(parent)].mean_log();
  const auto& rows = std::get<PerPatternWeights>(weights_.mode).by_parent[index(parent)];
  const auto& t = std::get<PatternTable>(orientation_.law(parent));
  double s = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) s += t.probabilities[r] * std::log(rows[r].front());
  return s;
}

// ---------------------------------------------------------------------------
// Spectral

PerronSystem perron(const Eigen::Matrix2d& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const double half_gap = 0.5 * (a - d);
  const double lambda = 0.5 * (a + d) + std::sqrt(half_gap * half_gap + b * c);

  auto pick = [](Eigen::Vector2d x, Eigen::Vector2d y) {
    return x.cwiseAbs().maxCoeff() >= y.cwiseAbs().maxCoeff() ? x : y;
  };
  Eigen::Vector2d right;
  Eigen::Vector2d left;
  if (b > 0.0 || c > 0.0) {
    right = pick(Eigen::Vector2d(b, lambda - a), Eigen::Vector2d(lambda - d, c));
    left = pick(Eigen::Vector2d(c, lambda - a), Eigen::Vector2d(lambda - d, b));
  } else if (a > d) {
    right = left = Eigen::Vector2d(1.0, 0.0);
  } else if (d > a) {
    right = left = Eigen::Vector2d(0.0, 1.0);
  } else {
    right = left = Eigen::Vector2d(1.0, 1.0);
  }
  if (right.sum() < 0.0) right = -right;
  PerronSystem out;
  out.eigenvalue = lambda;
  out.left = left.transpose() / left.sum();
  out.right = right / out.left.dot(right);
  return out;
}

namespace {

// Perron system of g * M0 using the closed-form eigenvectors of M0.
PerronSystem scaled_mean_perron(const OrientationLaw& law, double g) {
  const double mu_plus = law.mean_size(Orientation::Up);
  const double mu_minus = law.mean_size(Orientation::Down);
  const double mu = 0.5 * (mu_plus + mu_minus);
  PerronSystem out;
  out.eigenvalue = g * mu;
  out.left = Eigen::RowVector2d(0.5, 0.5);
  out.right = Eigen::Vector2d((mu_plus - 2.0) / (mu - 2.0), (mu_minus - 2.0) / (mu - 2.0));
  return out;
}

}  // namespace

MTheta m_theta(const ModelSpec& model, double theta) {
  const auto& law = model.orientation_law();
  MTheta out;
  const auto& mode = model.weight_law().mode;
  if (auto* table = std::get_if<PerPatternWeights>(&mode)) {
    out.matrix.setZero();
    for (Orientation parent : kOrientations) {
      const auto& t = std::get<PatternTable>(law.law(parent));
      const auto& rows = table->by_parent[index(parent)];
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < rows[r].size(); ++j)
          out.matrix(index(parent), index(t.patterns[r][j])) +=
              t.probabilities[r] * std::pow(rows[r][j], theta);
    }
    out.perron = perron(out.matrix);
    return out;
  }

  std::array<double, 2> g{};
  if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
    g.fill(std::pow(model.constant_weight(), theta));
  } else {
    const auto& iid = std::get<IidWeights>(mode);
    for (Orientation parent : kOrientations) g[index(parent)] = iid.by_parent[index(parent)].moment(theta);
  }
  for (Orientation parent : kOrientations)
    out.matrix.row(index(parent)) = g[index(parent)] * law.mean_counts(parent).transpose();

  const bool scalar = g[0] == g[1];
  const double mu = 0.5 * (law.mean_size(Orientation::Up) + law.mean_size(Orientation::Down));
  if (scalar && mu > 2.0)
    out.perron = scaled_mean_perron(law, g[0]);
  else
    out.perron = perron(out.matrix);
  return out;
}

MThetaEstimate m_theta_monte_carlo(const ModelSpec& model, double theta, std::size_t families,
                                   std::uint64_t seed) {
  CounterRng structure = CounterRng::stream(seed, 0);
  CounterRng weights = CounterRng::stream(seed, 1);
  std::array<std::array<RunningStats, 2>, 2> cells;
  std::array<std::vector<std::array<double, 2>>, 2> samples;
  Family family;
  for (Orientation parent : kOrientations) {
    samples[index(parent)].reserve(families);
    for (std::size_t n = 0; n < families; ++n) {
      model.draw_family(parent, structure, weights, family);
      std::array<double, 2> x{0.0, 0.0};
      for (std::size_t j = 0; j < family.pattern.size(); ++j)
        x[index(family.pattern[j])] += std::pow(family.weights[j], theta);
      cells[index(parent)][0].add(x[0]);
      cells[index(parent)][1].add(x[1]);
      samples[index(parent)].push_back(x);
    }
  }
  MThetaEstimate out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.matrix(i, j) = cells[i][j].mean();
      out.standard_error(i, j) = cells[i][j].standard_error();
    }
  const PerronSystem p = perron(out.matrix);
  out.eigenvalue = p.eigenvalue;
  double var = 0.0;
  for (int i = 0; i < 2; ++i) {
    RunningStats y;
    for (const auto& x : samples[i]) y.add(p.right(0) * x[0] + p.right(1) * x[1]);
    var += p.left(i) * p.left(i) * y.variance() / static_cast<double>(families);
  }
  out.eigenvalue_se = std::sqrt(var);
  return out;
}

SpectralSummary spectral_summary(const ModelSpec& model) {
  const auto& law = model.orientation_law();
  SpectralSummary s;
  s.mu_plus = law.mean_size(Orientation::Up);
  s.mu_minus = law.mean_size(Orientation::Down);
  s.mu = 0.5 * (s.mu_plus + s.mu_minus);
  s.m0 = m_theta(model, 0.0).matrix;
  const MTheta one = m_theta(model, 1.0);
  s.m1 = one.matrix;
  s.mu_at_one = one.perron.eigenvalue;
  s.left_u = one.perron.left;
  s.right_v = one.perron.right;
  s.hurst = std::log(2.0) / std::log(s.mu);
  s.straight_line = model.straight_line();
  s.first_up_given_up = law.first_up_probability(Orientation::Up);
  s.first_up_given_down = law.first_up_probability(Orientation::Down);
  if (s.first_up_given_up == 1.0 && s.first_up_given_down == 0.0) {
    if (!model.first_crossing_override())
      throw Error(ErrorCode::DegenerateFirstCrossing,
                  "first subcrossing always copies its parent; any first-crossing probability is "
                  "consistent, supply an override");
    s.fixed_point_a = *model.first_crossing_override();
    s.first_crossing_overridden = true;
  } else {
    s.fixed_point_a =
        s.first_up_given_down / (1.0 - s.first_up_given_up + s.first_up_given_down);
  }
  return s;
}

}  // namespace ebp
