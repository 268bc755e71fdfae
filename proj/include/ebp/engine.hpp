#pragma once

// On-line simulation of the level-0 crossings of an embedded branching
// process.
//
// The state is the line of descent of the current level-0 crossing: for each
// level n = 0..N the family (pattern and weights) of its level n+1 ancestor
// and the position s of the level-n ancestor inside it.  Each step moves one
// crossing to the right, redrawing exhausted families bottom-up, and adds a
// duration v^i * prod_n R(level-n ancestor) / R(level-n spine crossing).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ebp/model.hpp"
#include "ebp/sizebias.hpp"

namespace ebp {

enum class StartMode { FixedOrigin, RandomStart };

struct LevelState {
  std::uint64_t kappa = 0;  // index of the level-n ancestor crossing
  std::uint32_t s = 1;      // 1-based position of that crossing in `family`
  Family family;            // offspring of the level n+1 ancestor

  Orientation orientation() const noexcept { return family.pattern[s - 1]; }
  std::size_t parent_z() const noexcept { return family.pattern.size(); }
  bool exhausted() const noexcept { return s == family.pattern.size(); }
  double weight() const noexcept { return family.weights[s - 1]; }
};

struct SimulatorState {
  StartMode mode = StartMode::FixedOrigin;
  std::uint64_t k = 0;
  double t = 0.0;
  std::int64_t y = 0;
  // Fixed origin: the k = 1 crossing is produced by initialization and has
  // not been emitted yet.
  bool pending_initial = false;
  CounterRng structure;
  CounterRng weights;
  std::vector<LevelState> levels;
  std::vector<double> spine_weights;
};

struct SamplePoint {
  std::uint64_t k = 0;
  double t = 0.0;
  std::int64_t y = 0;
  Orientation orientation = Orientation::Up;
  double duration = 0.0;
};

class Simulator {
 public:
  // Initializes a fresh process.
  Simulator(ModelSpec model, StartMode mode, std::uint64_t seed);
  // Restores a saved state; throws SnapshotError when it is inconsistent.
  Simulator(ModelSpec model, SimulatorState state);

  const ModelSpec& model() const noexcept { return ctx_->model; }
  const SpectralSummary& spectral() const noexcept { return ctx_->spectral; }
  const SimulatorState& state() const noexcept { return state_; }
  StartMode mode() const noexcept { return state_.mode; }

  // N(k): index of the highest stored level.
  std::size_t depth() const noexcept { return state_.levels.size() - 1; }

  // The next crossing.  Fixed origin returns the initial crossing first.
  SamplePoint next();

  template <class Sink>
  void run(std::uint64_t steps, Sink&& sink) {
    for (std::uint64_t i = 0; i < steps; ++i) sink(next());
  }

  // Called with (level, family) for every family drawn without conditioning,
  // i.e. off the spine.
  using FamilyObserver = std::function<void(std::size_t, const Family&)>;
  void set_family_observer(FamilyObserver f) { observer_ = std::move(f); }

  // Called with (level, orientation) as each spinal crossing above the
  // initial ones is generated.
  using SpineObserver = std::function<void(std::size_t, Orientation)>;
  void set_spine_observer(SpineObserver f) { spine_observer_ = std::move(f); }

  // Exposed for tests of the individual procedures.
  void expand();
  void increment(std::size_t n);
  SamplePoint step();

 private:
  struct Context {
    explicit Context(ModelSpec m);
    ModelSpec model;
    SpectralSummary spectral;
    std::optional<TiltedLaws> tilted;
    std::optional<SpineChains> chains;
  };

  void initialize_fixed_origin();
  void initialize_random_start();
  void push_fixed_origin_level();
  void push_random_start_level();
  bool all_exhausted() const noexcept;
  double duration(Orientation i) const;
  void validate() const;

  std::shared_ptr<Context> ctx_;
  SimulatorState state_;
  FamilyObserver observer_;
  SpineObserver spine_observer_;
};

}  // namespace ebp
