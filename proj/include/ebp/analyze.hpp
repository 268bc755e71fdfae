#pragma once

// Crossing trees read off sampled paths, and estimators over them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebp/model.hpp"
#include "ebp/stats.hpp"

namespace ebp {

struct ExtractedCrossing {
  Orientation orientation = Orientation::Up;
  std::uint32_t first_child = 0;  // index into the level below
  std::uint32_t child_count = 0;
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
};

struct ExtractedTree {
  // levels[0] are the input steps; levels[n + 1] are the complete crossings
  // of 2^(n+1) Z built from levels[n].
  std::vector<std::vector<ExtractedCrossing>> levels;
  // Trailing level-n crossings left over after the last complete level-(n+1)
  // crossing; they are excluded from the level above.
  std::vector<std::size_t> discarded;

  int max_level() const noexcept { return static_cast<int>(levels.size()) - 1; }
  OffspringPattern pattern(int level, std::size_t i) const;
};

// Points are (t_k, y_k) for k = 0, 1, ...; y_0 must be 0 and every increment
// must be +-2^base_level.  Levels above max_level are not built.
ExtractedTree extract_crossing_tree(std::span<const double> t, std::span<const std::int64_t> y, int max_level,
                                    int base_level = 0);

struct LevelEstimate {
  int level = 0;
  Estimate mu_hat;                     // mean number of subcrossings
  std::array<Estimate, 2> duration;    // by orientation
  double max_duration_share = 0.0;     // atom diagnostic
};

struct EstimateReport {
  std::vector<LevelEstimate> levels;   // levels 1..L
  Estimate pooled_mu_hat;
  double hurst_hat = 0.0;
  std::array<Estimate, 2> level0_duration;
  std::vector<std::size_t> discarded;
};

// Durations are end - start of each crossing.  The atom diagnostic is the
// longest level-n crossing inside the complete top-level crossings, as a
// share of their total duration.
EstimateReport estimate(const ExtractedTree& tree);

struct ScaleInvarianceReport {
  int level_low = 0;
  int level_high = 0;
  Estimate ratio;              // mean duration level_high / level_low
  double expected_ratio = 0.0; // mu^(level_high - level_low)
  bool pass = false;
  // Per-level shift of the mean log duration; informational.
  Estimate log_shift;
  double log_shift_prediction = 0.0;
};

inline constexpr std::size_t kMinCrossingsForScaling = 1000;

// Needs kMinCrossingsForScaling crossings at both levels (InsufficientData
// otherwise).  The prediction for the log shift is log mu for constant
// weights and -E log R of a branch, averaged over the stationary orientation
// mix, otherwise.
ScaleInvarianceReport scale_invariance_check(const ExtractedTree& tree, int level_low, int level_high,
                                             const ModelSpec& model);

}  // namespace ebp
