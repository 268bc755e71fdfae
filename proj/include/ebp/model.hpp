#pragma once

// Offspring-orientation and weight laws of an embedded branching process,
// plus the spectral quantities derived from them.
//
// Orientation vectors are indexed Up = 0, Down = 1 throughout, so row i of
// every 2x2 matrix is "parent has orientation i".

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ebp/rng.hpp"

namespace ebp {

enum class Orientation : std::uint8_t { Up = 0, Down = 1 };

constexpr Orientation flip(Orientation o) noexcept {
  return o == Orientation::Up ? Orientation::Down : Orientation::Up;
}
constexpr Orientation operator-(Orientation o) noexcept { return flip(o); }
constexpr int step(Orientation o) noexcept { return o == Orientation::Up ? 1 : -1; }
constexpr int index(Orientation o) noexcept { return static_cast<int>(o); }
constexpr char symbol(Orientation o) noexcept { return o == Orientation::Up ? '+' : '-'; }
constexpr std::array<Orientation, 2> kOrientations{Orientation::Up, Orientation::Down};

std::optional<Orientation> orientation_from_symbol(char c) noexcept;

enum class PairKind : std::uint8_t { UpDown, DownUp, UpUp, DownDown };

// Subcrossing orientations of one crossing: excursion pairs then a direct
// pair.  Stored flattened so entry j is O(1).
class OffspringPattern {
 public:
  OffspringPattern() = default;
  OffspringPattern(std::span<const PairKind> excursions, PairKind direct);

  // Accepts any even-length sequence whose leading pairs are excursions and
  // whose final pair is direct; the parent orientation is not checked here.
  static std::optional<OffspringPattern> from_orientations(std::span<const Orientation> seq);
  // "+-++" style; whitespace ignored.
  static std::optional<OffspringPattern> parse(std::string_view text);

  std::size_t size() const noexcept { return seq_.size(); }
  bool empty() const noexcept { return seq_.empty(); }
  Orientation operator[](std::size_t j) const noexcept { return seq_[j]; }
  Orientation front() const noexcept { return seq_.front(); }
  Orientation back() const noexcept { return seq_.back(); }
  std::span<const Orientation> orientations() const noexcept { return seq_; }

  std::size_t excursion_count() const noexcept { return seq_.size() / 2 - 1; }
  std::vector<PairKind> excursions() const;
  PairKind direct() const noexcept;
  std::size_t count(Orientation o) const noexcept;
  std::string to_string() const;

  friend bool operator==(const OffspringPattern&, const OffspringPattern&) = default;

  // Buffer-reusing builders for samplers.
  void reset(std::size_t excursions) {
    seq_.clear();
    seq_.reserve(2 * excursions + 2);
  }
  void push_excursion(bool up_first) {
    seq_.push_back(up_first ? Orientation::Up : Orientation::Down);
    seq_.push_back(up_first ? Orientation::Down : Orientation::Up);
  }
  void push_direct(Orientation parent) {
    seq_.push_back(parent);
    seq_.push_back(parent);
  }

 private:
  std::vector<Orientation> seq_;
};

bool validate_pattern(std::span<const Orientation> seq, Orientation parent) noexcept;
inline bool validate_pattern(const OffspringPattern& a, Orientation parent) noexcept {
  return validate_pattern(a.orientations(), parent);
}

// ---------------------------------------------------------------------------
// Orientation laws

// Geometric number of excursions, P(z) = p (1 - p)^z for z >= 0; each
// excursion is up-down with probability `updown_probability`.
struct GeometricExcursions {
  double stop_probability = 0.5;
  double updown_probability = 0.5;
};

struct ConstantExcursions {
  std::uint32_t count = 0;
  double updown_probability = 0.5;
};

struct PatternTable {
  std::vector<OffspringPattern> patterns;
  std::vector<double> probabilities;
};

using ExcursionLaw = std::variant<GeometricExcursions, ConstantExcursions, PatternTable>;

class OrientationLaw {
 public:
  OrientationLaw(ExcursionLaw up, ExcursionLaw down);

  // Same parameters for both parents; a table is mirrored for the down parent.
  static OrientationLaw symmetric(const ExcursionLaw& up);

  const ExcursionLaw& law(Orientation parent) const noexcept { return laws_[index(parent)]; }
  bool is_table(Orientation parent) const noexcept {
    return std::holds_alternative<PatternTable>(law(parent));
  }

  double mean_size(Orientation parent) const noexcept;
  // (E Z+, E Z-) given the parent.
  Eigen::Vector2d mean_counts(Orientation parent) const noexcept;
  double first_up_probability(Orientation parent) const noexcept;
  bool always_two(Orientation parent) const noexcept;

  // Draws a pattern into `out`; returns the table row or -1 for parametric laws.
  // Structure stream order: excursion count, then one draw per excursion.
  int sample(Orientation parent, CounterRng& rng, OffspringPattern& out) const;

 private:
  std::array<ExcursionLaw, 2> laws_;
};

// ---------------------------------------------------------------------------
// Weight laws

enum class WeightFamily { Deterministic, Gamma, Lognormal };

// deterministic: first = value; gamma: first = shape, second = scale;
// lognormal: first = mean of log, second = sd of log.
struct WeightDistribution {
  WeightFamily family = WeightFamily::Deterministic;
  double first = 1.0;
  double second = 0.0;

  static WeightDistribution deterministic(double value) { return {WeightFamily::Deterministic, value, 0.0}; }
  static WeightDistribution gamma(double shape, double scale) { return {WeightFamily::Gamma, shape, scale}; }
  static WeightDistribution lognormal(double mu, double sigma) { return {WeightFamily::Lognormal, mu, sigma}; }

  double mean() const noexcept { return moment(1.0); }
  // E R^theta; throws InfiniteMoment where it diverges.
  double moment(double theta) const;
  // d/dtheta E R^theta = E R^theta log R.
  double moment_derivative(double theta) const;
  double mean_log() const noexcept;
  // E log R under the first-moment tilted law s F(ds) / E R.
  double size_biased_mean_log() const noexcept;
  double sample(CounterRng& rng) const noexcept;
  double sample_size_biased(CounterRng& rng) const noexcept;
  WeightDistribution scaled(double c) const noexcept;

  friend bool operator==(const WeightDistribution&, const WeightDistribution&) = default;
};

std::string_view to_string(WeightFamily f) noexcept;

// R(j) = 1/mu for every branch.
struct ConstantReciprocalMu {};

// R(j) iid given the parent orientation.
struct IidWeights {
  std::array<WeightDistribution, 2> by_parent;
  bool orientation_dependent = false;
};

// Deterministic weight vector per pattern-table row.
struct PerPatternWeights {
  std::array<std::vector<std::vector<double>>, 2> by_parent;
};

using WeightMode = std::variant<ConstantReciprocalMu, IidWeights, PerPatternWeights>;

struct WeightLaw {
  WeightMode mode = ConstantReciprocalMu{};
  bool normalize = true;
};

struct Family {
  OffspringPattern pattern;
  std::vector<double> weights;
};

inline constexpr std::uint64_t kRejectionCap = 1'000'000;

// One fully specified process.  Immutable after `create`, which validates the
// laws and applies weight normalization.
class ModelSpec {
 public:
  static ModelSpec create(OrientationLaw orientation, WeightLaw weights,
                          std::optional<double> first_crossing_override = std::nullopt,
                          std::string name = {});

  const OrientationLaw& orientation_law() const noexcept { return orientation_; }
  const WeightLaw& weight_law() const noexcept { return weights_; }
  std::optional<double> first_crossing_override() const noexcept { return override_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // Factor multiplied into the user's weights by normalization (1 if off).
  double normalization_factor() const noexcept { return normalization_; }
  // Z == 2 surely for both parents.
  bool straight_line() const noexcept { return straight_line_; }
  bool constant_weights() const noexcept;
  // Weight law identical for both parents with iid or constant weights.
  bool weights_orientation_independent() const noexcept;
  bool iid_weights() const noexcept;
  // Value of R when weights are constant.
  double constant_weight() const noexcept { return constant_weight_; }

  // Weight stream order: one draw per branch, left to right.
  void draw_weights(Orientation parent, int row, std::size_t z, CounterRng& rng,
                    std::vector<double>& out) const;
  void draw_family(Orientation parent, CounterRng& structure, CounterRng& weights,
                   Family& out) const;
  // Exact rejection on the first subcrossing; weights are drawn once the
  // pattern is accepted.
  void draw_family_first_child(Orientation parent, Orientation first, CounterRng& structure,
                               CounterRng& weights, Family& out) const;

  // E log R(1) given the parent.
  double mean_log_first_weight(Orientation parent) const;

 private:
  ModelSpec(OrientationLaw o, WeightLaw w) : orientation_(std::move(o)), weights_(std::move(w)) {}

  OrientationLaw orientation_;
  WeightLaw weights_;
  std::optional<double> override_;
  std::string name_;
  std::vector<std::string> warnings_;
  double normalization_ = 1.0;
  double constant_weight_ = 0.0;
  bool straight_line_ = false;
};

// ---------------------------------------------------------------------------
// Spectral quantities

// Perron root of a nonnegative 2x2 matrix with left vector summing to one and
// right vector scaled so left . right = 1.
struct PerronSystem {
  double eigenvalue = 0.0;
  Eigen::RowVector2d left;
  Eigen::Vector2d right;
};

PerronSystem perron(const Eigen::Matrix2d& m);

struct MTheta {
  Eigen::Matrix2d matrix;
  PerronSystem perron;
};

// m_ij(theta) = E( sum over children of type j of R^theta | parent i ).
MTheta m_theta(const ModelSpec& model, double theta);

struct MThetaEstimate {
  Eigen::Matrix2d matrix;
  Eigen::Matrix2d standard_error;
  double eigenvalue = 0.0;
  double eigenvalue_se = 0.0;
};

// Sampling estimate of M(theta) from `families` draws per parent; the
// eigenvalue error is first order (delta method).
MThetaEstimate m_theta_monte_carlo(const ModelSpec& model, double theta, std::size_t families,
                                   std::uint64_t seed);

struct SpectralSummary {
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double mu = 0.0;
  Eigen::Matrix2d m0;
  Eigen::Matrix2d m1;
  double mu_at_one = 0.0;
  Eigen::RowVector2d left_u;
  Eigen::Vector2d right_v;
  double hurst = 0.0;
  double fixed_point_a = 0.0;
  double first_up_given_up = 0.0;
  double first_up_given_down = 0.0;
  bool first_crossing_overridden = false;
  bool straight_line = false;

  double v(Orientation o) const noexcept { return right_v(index(o)); }
  double u(Orientation o) const noexcept { return left_u(index(o)); }
  // P(parent Up | child orientation) for the Bayes-reversed first-crossing chain.
  double parent_up_probability(Orientation child) const noexcept {
    return child == Orientation::Up ? first_up_given_up : first_up_given_down;
  }
};

SpectralSummary spectral_summary(const ModelSpec& model);

// ---------------------------------------------------------------------------
// Assumption checks

enum class CheckStatus { Pass, Fail, Unverifiable };
std::string_view to_string(CheckStatus s) noexcept;

struct AssumptionCheck {
  CheckStatus status = CheckStatus::Unverifiable;
  double value = 0.0;
  double tolerance = 0.0;
  std::string evidence;
};

struct AssumptionReport {
  AssumptionCheck a1;  // mu+/mu- > 2
  AssumptionCheck a2;  // mu(1) = 1, mu'(1) < 0, delta moment
  AssumptionCheck a3;  // spine first-weight log drift
  AssumptionCheck a4;  // size-biased spinal log drift
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double mu_at_one = 0.0;
  double conservation_residual = 0.0;
  double mu_prime_at_one = 0.0;
  bool mu_prime_closed_form = false;
  std::vector<std::pair<double, double>> delta_grid;  // (delta, mu(delta))
  std::vector<std::string> warnings;

  bool any_fail() const noexcept;
  bool all_pass() const noexcept;
};

inline constexpr double kConservationTolerance = 1e-9;
inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr std::array<double, 4> kDeltaGrid{1.1, 1.25, 1.5, 2.0};

AssumptionReport check_assumptions(const ModelSpec& model);

// ---------------------------------------------------------------------------
// Builtin catalog

using ModelParams = std::map<std::string, std::string, std::less<>>;

ModelSpec builtin_model(std::string_view name, const ModelParams& params = {});
std::vector<std::string> builtin_names();

}  // namespace ebp
