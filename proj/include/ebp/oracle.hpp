#pragma once

// Brute-force reference: explicit crossing trees of fixed depth, the exact
// cascade recursion W_i = sum_j R_i(j) W_ij from leaves W = v^orientation,
// and the approximating walks read off a tree.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ebp/model.hpp"
#include "ebp/stats.hpp"

namespace ebp {

struct OracleNode {
  Orientation orientation = Orientation::Up;
  double branch_weight = 1.0;  // R from the parent; 1 at the root
  std::uint32_t first_child = 0;
  std::uint32_t child_count = 0;
  double w_estimate = 0.0;
  double rho = 1.0;  // product of branch weights from the root
};

inline constexpr double kDefaultNodeCap = 1e7;

class OracleTree {
 public:
  // generations()[g] holds the nodes g levels below the root; children of a
  // node are contiguous in the next generation.
  const std::vector<std::vector<OracleNode>>& generations() const noexcept { return gens_; }
  std::vector<std::vector<OracleNode>>& generations() noexcept { return gens_; }
  int depth() const noexcept { return static_cast<int>(gens_.size()) - 1; }
  const OracleNode& root() const noexcept { return gens_[0][0]; }
  std::size_t node_count() const noexcept;
  std::uint64_t seed = 0;

  // Subcrossing orientations of a node as a pattern.
  OffspringPattern pattern(int generation, std::size_t node) const;
  // Duration of a node under the cascade clock, rho * W.
  double duration(int generation, std::size_t node) const {
    const auto& n = gens_[generation][node];
    return n.rho * n.w_estimate;
  }

 private:
  std::vector<std::vector<OracleNode>> gens_;
};

// Root orientation defaults to Up with probability a.
OracleTree build_tree(const ModelSpec& model, int depth, std::uint64_t seed,
                      std::optional<Orientation> root = std::nullopt, double node_cap = kDefaultNodeCap);

// Leaves get v^orientation; internal nodes the weighted sum of their
// children.  Also fills rho.
void refine_w(OracleTree& tree, const SpectralSummary& spectral);

// Depth-d estimate of W at a root of the given orientation without storing
// the tree.  Draw order differs from build_tree.
double sample_root_w(const ModelSpec& model, const SpectralSummary& spectral, int depth,
                     Orientation root, CounterRng& structure, CounterRng& weights);

enum class ClockMode { Canonical, Cascade };

struct WalkPoint {
  double t = 0.0;
  double x = 0.0;
};

// Breakpoints of the generation-n walk: steps of 2^-n; each step lasts mu^-n
// (Canonical) or rho * W of its node (Cascade, requires refine_w).
std::vector<WalkPoint> walk_from_tree(const OracleTree& tree, int n, ClockMode clock, double mu);

// Largest |parent - sum(children)| / parent over internal nodes of the
// cascade clock.
double max_additivity_error(const OracleTree& tree);

std::string dump_tree(const OracleTree& tree);

// ---------------------------------------------------------------------------
// Engine against oracle

struct ComparisonCheck {
  std::string name;
  Estimate engine;
  Estimate oracle;
  bool pass = false;
};

struct ComparisonReport {
  int engine_level = 0;  // level L of the engine crossings compared
  int oracle_depth = 0;
  std::vector<ComparisonCheck> checks;
  bool pass() const noexcept;
};

struct ComparisonOptions {
  std::uint64_t engine_steps = 100000;
  std::size_t oracle_trees = 10000;
  int depth = 8;
  std::uint64_t seed = 1;
  std::size_t min_crossings = 1000;
  unsigned threads = 1;
};

// Compares the normalized durations of complete level-L engine crossings,
// sum over their level-0 crossings of v^i prod_{j<L} R_j, with depth-d oracle
// estimates of W at the root, by orientation; both have mean v^orientation.
// Also compares mean family sizes by parent.  `oracle_model` may differ from
// `engine_model` (negative controls).
ComparisonReport compare_with_engine(const ModelSpec& engine_model, const ModelSpec& oracle_model,
                                     const ComparisonOptions& options);

}  // namespace ebp
