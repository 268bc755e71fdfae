#pragma once

// Size-biased laws along the spine through a uniformly chosen time.
//
// Offspring of a spinal crossing with parent orientation i have law
//   p~(a) F~(dr | a)  proportional to  p(a) F(dr | a) sum_j v^{a(j)} r(j),
// and the next spinal crossing is child j with probability proportional to
// v^{a(j)} r(j).

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ebp/model.hpp"
#include "ebp/stats.hpp"

namespace ebp {

class TiltedLaws {
 public:
  TiltedLaws(const ModelSpec& model, const SpectralSummary& spectral);

  const ModelSpec& model() const noexcept { return *model_; }
  const SpectralSummary& spectral() const noexcept { return spectral_; }

  // sum_a p(a) sum_j v^{a(j)} E R(j) given the parent; equals v^parent when
  // M(1) v = v.
  double normalizer(Orientation parent) const noexcept { return normalizer_[index(parent)]; }

  // p~(a) for a pattern admissible under the parent.
  double pattern_probability(Orientation parent, const OffspringPattern& a) const;
  // Tilted row probabilities of a pattern-table law (empty otherwise).
  const std::vector<double>& table_probabilities(Orientation parent) const noexcept {
    return table_[index(parent)];
  }

  // Draws (a, r) from p~ F~.  Structure stream: pattern; weight stream: the
  // size-biased slot (iid laws) then weights left to right.
  void sample_family(Orientation parent, CounterRng& structure, CounterRng& weights,
                     Family& out) const;

  double spine_child_probability(const Family& f, std::size_t j) const;
  // Categorical over children, proportional to v^{a(j)} r(j); one structure draw.
  std::size_t select_spine_child(const Family& f, CounterRng& structure) const;

 private:
  const ModelSpec* model_;
  SpectralSummary spectral_;
  std::array<double, 2> normalizer_{};
  std::array<std::vector<double>, 2> table_;
  // Geometric laws: probability of the untilted geometric component.
  std::array<double, 2> geometric_mix_{};
};

struct SpineChains {
  Eigen::Matrix2d down;        // parent -> spinal child
  Eigen::Matrix2d up;          // spinal child -> parent
  Eigen::RowVector2d stationary;
};

SpineChains spine_chains(const SpectralSummary& spectral, const Eigen::Matrix2d& m1);

struct SpinalLogMoment {
  std::array<double, 2> mean_log{};  // E log R+, E log R-
  std::array<double, 2> standard_error{};
  bool closed_form = true;
};

SpinalLogMoment spinal_log_moment(const TiltedLaws& tilted);
// Monte Carlo version of the same quantity through the sampling path.
SpinalLogMoment spinal_log_moment_monte_carlo(const TiltedLaws& tilted, std::size_t draws,
                                              std::uint64_t seed);

AssumptionCheck check_assumption4(const TiltedLaws& tilted, const SpineChains& chains);

}  // namespace ebp
