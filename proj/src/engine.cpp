#include "ebp/engine.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ebp/error.hpp"

namespace ebp {

Simulator::Context::Context(ModelSpec m) : model(std::move(m)), spectral(spectral_summary(model)) {}

Simulator::Simulator(ModelSpec model, StartMode mode, std::uint64_t seed)
    : ctx_(std::make_shared<Context>(std::move(model))) {
  state_.mode = mode;
  state_.structure = CounterRng::stream(seed, 0);
  state_.weights = CounterRng::stream(seed, 1);
  if (mode == StartMode::RandomStart) {
    ctx_->tilted.emplace(ctx_->model, ctx_->spectral);
    ctx_->chains = spine_chains(ctx_->spectral, ctx_->spectral.m1);
    initialize_random_start();
  } else {
    initialize_fixed_origin();
  }
}

Simulator::Simulator(ModelSpec model, SimulatorState state)
    : ctx_(std::make_shared<Context>(std::move(model))), state_(std::move(state)) {
  if (state_.mode == StartMode::RandomStart) {
    ctx_->tilted.emplace(ctx_->model, ctx_->spectral);
    ctx_->chains = spine_chains(ctx_->spectral, ctx_->spectral.m1);
  }
  validate();
}

void Simulator::validate() const {
  auto bad = [](std::string_view what) { throw Error(ErrorCode::SnapshotError, std::string(what)); };
  const auto& levels = state_.levels;
  if (levels.empty()) bad("no levels");
  if (levels.size() != state_.spine_weights.size()) bad("spine weight count differs from level count");
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& l = levels[n];
    if (l.family.pattern.empty() || l.family.pattern.size() != l.family.weights.size())
      bad(fmt::format("level {}: pattern and weights differ in length", n));
    if (l.s < 1 || l.s > l.family.pattern.size()) bad(fmt::format("level {}: position out of range", n));
    const Orientation parent = n + 1 < levels.size() ? levels[n + 1].orientation() : l.family.pattern.back();
    if (!validate_pattern(l.family.pattern, parent))
      bad(fmt::format("level {}: pattern {} is not admissible", n, l.family.pattern.to_string()));
    for (double w : l.family.weights)
      if (!(std::isfinite(w) && w > 0.0)) bad(fmt::format("level {}: weight {} not positive", n, w));
    if (!(std::isfinite(state_.spine_weights[n]) && state_.spine_weights[n] > 0.0))
      bad(fmt::format("level {}: spine weight not positive", n));
  }
  if (state_.pending_initial && state_.mode != StartMode::FixedOrigin) bad("pending initial crossing in random-start mode");
}

void Simulator::initialize_fixed_origin() {
  const Orientation top = state_.structure.bernoulli(ctx_->spectral.fixed_point_a) ? Orientation::Up
                                                                                   : Orientation::Down;
  LevelState level;
  level.kappa = 1;
  level.s = 1;
  ctx_->model.draw_family(top, state_.structure, state_.weights, level.family);
  state_.spine_weights.push_back(level.family.weights.front());
  const Orientation first = level.family.pattern.front();
  state_.levels.push_back(std::move(level));
  state_.k = 1;
  state_.t = ctx_->spectral.v(first);
  state_.y = ebp::step(first);
  state_.pending_initial = true;
}

void Simulator::initialize_random_start() {
  const auto& chains = *ctx_->chains;
  const Orientation top = state_.structure.bernoulli(chains.stationary(0)) ? Orientation::Up : Orientation::Down;
  LevelState level;
  level.kappa = 0;
  ctx_->tilted->sample_family(top, state_.structure, state_.weights, level.family);
  const std::size_t spine = ctx_->tilted->select_spine_child(level.family, state_.structure);
  level.s = static_cast<std::uint32_t>(spine + 1);
  state_.spine_weights.push_back(level.family.weights[spine]);
  state_.levels.push_back(std::move(level));
  state_.k = 0;
  state_.t = 0.0;
  state_.y = 0;
}

bool Simulator::all_exhausted() const noexcept {
  for (const auto& l : state_.levels)
    if (!l.exhausted()) return false;
  return true;
}

void Simulator::push_fixed_origin_level() {
  // Orientation of the current top crossing, whose parent is drawn from the
  // first-crossing chain run upwards.
  const Orientation current = state_.levels.back().family.pattern.back();
  const Orientation parent = state_.structure.bernoulli(ctx_->spectral.parent_up_probability(current))
                                 ? Orientation::Up
                                 : Orientation::Down;
  LevelState level;
  level.kappa = 1;
  level.s = 1;
  ctx_->model.draw_family_first_child(parent, current, state_.structure, state_.weights, level.family);
  state_.spine_weights.push_back(level.family.weights.front());
  state_.levels.push_back(std::move(level));
  if (spine_observer_) spine_observer_(state_.levels.size(), parent);
}

void Simulator::push_random_start_level() {
  const Orientation current = state_.levels.back().family.pattern.back();
  const auto& up = ctx_->chains->up;
  const Orientation parent =
      state_.structure.bernoulli(up(index(current), 0)) ? Orientation::Up : Orientation::Down;
  LevelState level;
  level.kappa = 0;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == kRejectionCap)
      throw Error(ErrorCode::RejectionCapExceeded,
                  fmt::format("no tilted family for parent {} with spinal child {} after {} attempts",
                              symbol(parent), symbol(current), kRejectionCap));
    ctx_->tilted->sample_family(parent, state_.structure, state_.weights, level.family);
    const std::size_t spine = ctx_->tilted->select_spine_child(level.family, state_.structure);
    if (level.family.pattern[spine] == current) {
      level.s = static_cast<std::uint32_t>(spine + 1);
      break;
    }
  }
  state_.spine_weights.push_back(level.weight());
  state_.levels.push_back(std::move(level));
  if (spine_observer_) spine_observer_(state_.levels.size(), parent);
}

void Simulator::expand() {
  // A new level is needed exactly when the coming increment would carry past
  // the current top.
  if (!all_exhausted()) return;
  if (state_.mode == StartMode::FixedOrigin) {
    push_fixed_origin_level();
  } else {
    do push_random_start_level();
    while (state_.levels.back().exhausted());
  }
}

void Simulator::increment(std::size_t n) {
  LevelState& level = state_.levels[n];
  ++level.kappa;
  if (!level.exhausted()) {
    ++level.s;
    return;
  }
  if (n + 1 >= state_.levels.size())
    throw Error(ErrorCode::InvalidModel, "increment past the top level; expand was not called");
  increment(n + 1);
  LevelState& same = state_.levels[n];
  same.s = 1;
  const Orientation parent = state_.levels[n + 1].orientation();
  ctx_->model.draw_family(parent, state_.structure, state_.weights, same.family);
  if (observer_) observer_(n, same.family);
}

double Simulator::duration(Orientation i) const {
  double log_ratio = 0.0;
  for (std::size_t n = state_.levels.size(); n-- > 0;)
    log_ratio += std::log(state_.levels[n].weight()) - std::log(state_.spine_weights[n]);
  const double d = ctx_->spectral.v(i) * std::exp(log_ratio);
  if (std::isinf(d))
    throw Error(ErrorCode::NumericOverflow, fmt::format("duration overflowed at step {}", state_.k + 1));
  if (d == 0.0 || std::fpclassify(d) == FP_SUBNORMAL)
    throw Error(ErrorCode::NumericUnderflow, fmt::format("duration underflowed at step {}", state_.k + 1));
  return d;
}

SamplePoint Simulator::step() {
  expand();
  increment(0);
  const Orientation i = state_.levels.front().orientation();
  const double d = duration(i);
  state_.y += ebp::step(i);
  state_.t += d;
  state_.k += 1;
  return {state_.k, state_.t, state_.y, i, d};
}

SamplePoint Simulator::next() {
  if (state_.pending_initial) {
    state_.pending_initial = false;
    const Orientation i = state_.levels.front().orientation();
    return {state_.k, state_.t, state_.y, i, state_.t};
  }
  return step();
}

}  // namespace ebp
