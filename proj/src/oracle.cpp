#include "ebp/oracle.hpp"

#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "ebp/engine.hpp"
#include "ebp/error.hpp"

namespace ebp {

std::size_t OracleTree::node_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : gens_) n += g.size();
  return n;
}

OffspringPattern OracleTree::pattern(int generation, std::size_t node) const {
  const auto& n = gens_[generation][node];
  std::vector<Orientation> seq;
  for (std::uint32_t c = 0; c < n.child_count; ++c) seq.push_back(gens_[generation + 1][n.first_child + c].orientation);
  auto p = OffspringPattern::from_orientations(seq);
  return p ? *p : OffspringPattern{};
}

OracleTree build_tree(const ModelSpec& model, int depth, std::uint64_t seed, std::optional<Orientation> root,
                      double node_cap) {
  if (depth < 0) throw Error(ErrorCode::InvalidModel, "tree depth must be nonnegative");
  const auto& law = model.orientation_law();
  const double mu = std::max(law.mean_size(Orientation::Up), law.mean_size(Orientation::Down));
  double expected = 0.0;
  for (int g = 0; g <= depth; ++g) expected += std::pow(mu, g);
  if (expected > node_cap)
    throw Error(ErrorCode::CapExceeded,
                fmt::format("depth {} tree has about {:.3g} nodes, above the cap {:.3g}", depth, expected, node_cap));

  CounterRng structure = CounterRng::stream(seed, 0);
  CounterRng weights = CounterRng::stream(seed, 1);
  OracleTree tree;
  tree.seed = seed;
  auto& gens = tree.generations();
  gens.resize(static_cast<std::size_t>(depth) + 1);
  OracleNode r;
  if (root)
    r.orientation = *root;
  else
    r.orientation = structure.bernoulli(spectral_summary(model).fixed_point_a) ? Orientation::Up : Orientation::Down;
  gens[0].push_back(r);

  std::size_t total = 1;
  Family family;
  for (int g = 0; g < depth; ++g) {
    auto& parents = gens[g];
    auto& children = gens[g + 1];
    for (auto& p : parents) {
      model.draw_family(p.orientation, structure, weights, family);
      p.first_child = static_cast<std::uint32_t>(children.size());
      p.child_count = static_cast<std::uint32_t>(family.pattern.size());
      for (std::size_t j = 0; j < family.pattern.size(); ++j) {
        OracleNode c;
        c.orientation = family.pattern[j];
        c.branch_weight = family.weights[j];
        children.push_back(c);
      }
    }
    total += children.size();
    if (static_cast<double>(total) > node_cap)
      throw Error(ErrorCode::CapExceeded, fmt::format("tree exceeded {:.3g} nodes at generation {}", node_cap, g + 1));
  }
  return tree;
}

void refine_w(OracleTree& tree, const SpectralSummary& spectral) {
  auto& gens = tree.generations();
  for (auto& leaf : gens.back()) leaf.w_estimate = spectral.v(leaf.orientation);
  for (std::size_t g = gens.size() - 1; g-- > 0;) {
    for (auto& p : gens[g]) {
      double w = 0.0;
      for (std::uint32_t c = 0; c < p.child_count; ++c) {
        const auto& child = gens[g + 1][p.first_child + c];
        w += child.branch_weight * child.w_estimate;
      }
      p.w_estimate = w;
    }
  }
  gens[0][0].rho = 1.0;
  for (std::size_t g = 0; g + 1 < gens.size(); ++g)
    for (const auto& p : gens[g])
      for (std::uint32_t c = 0; c < p.child_count; ++c) {
        auto& child = gens[g + 1][p.first_child + c];
        child.rho = p.rho * child.branch_weight;
      }
}

namespace {

struct SizeTally {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double z) {
    n += 1.0;
    sum += z;
    sumsq += z * z;
  }
  void merge(const SizeTally& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  Estimate estimate() const {
    const double mean = sum / n;
    const double var = n > 1 ? (sumsq - n * mean * mean) / (n - 1.0) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / n), static_cast<std::size_t>(n)};
  }
};

struct Walker {
  const ModelSpec& model;
  const SpectralSummary& spectral;
  CounterRng& structure;
  CounterRng& weights;
  std::vector<Family> buffers;
  std::array<SizeTally, 2>* sizes = nullptr;

  double w(Orientation o, int depth) {
    if (depth == 0) return spectral.v(o);
    Family& f = buffers[static_cast<std::size_t>(depth)];
    model.draw_family(o, structure, weights, f);
    if (sizes) (*sizes)[index(o)].add(static_cast<double>(f.pattern.size()));
    double sum = 0.0;
    // f is reused by deeper calls only at smaller depths, so it stays valid.
    for (std::size_t j = 0; j < f.pattern.size(); ++j) sum += f.weights[j] * w(f.pattern[j], depth - 1);
    return sum;
  }
};

}  // namespace

double sample_root_w(const ModelSpec& model, const SpectralSummary& spectral, int depth, Orientation root,
                     CounterRng& structure, CounterRng& weights) {
  Walker walker{model, spectral, structure, weights, std::vector<Family>(static_cast<std::size_t>(depth) + 1)};
  return walker.w(root, depth);
}

std::vector<WalkPoint> walk_from_tree(const OracleTree& tree, int n, ClockMode clock, double mu) {
  if (n < 0 || n > tree.depth()) throw Error(ErrorCode::InvalidModel, "walk level outside the tree");
  const auto& gen = tree.generations()[static_cast<std::size_t>(n)];
  const double size = std::ldexp(1.0, -n);
  const double tick = std::pow(mu, -n);
  std::vector<WalkPoint> out;
  out.reserve(gen.size() + 1);
  out.push_back({0.0, 0.0});
  double t = 0.0;
  double x = 0.0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    t += clock == ClockMode::Canonical ? tick : tree.duration(n, i);
    x += size * step(gen[i].orientation);
    out.push_back({t, x});
  }
  return out;
}

double max_additivity_error(const OracleTree& tree) {
  const auto& gens = tree.generations();
  double worst = 0.0;
  for (std::size_t g = 0; g + 1 < gens.size(); ++g)
    for (std::size_t i = 0; i < gens[g].size(); ++i) {
      const auto& p = gens[g][i];
      double sum = 0.0;
      for (std::uint32_t c = 0; c < p.child_count; ++c)
        sum += tree.duration(static_cast<int>(g + 1), p.first_child + c);
      const double d = tree.duration(static_cast<int>(g), i);
      worst = std::max(worst, std::abs(d - sum) / d);
    }
  return worst;
}

std::string dump_tree(const OracleTree& tree) {
  std::string out;
  const auto& gens = tree.generations();
  auto rec = [&](auto&& self, std::size_t g, std::size_t i) -> void {
    const auto& n = gens[g][i];
    out += fmt::format("{:{}}{} Z={} R={:.6g} W={:.6g}\n", "", 2 * g, symbol(n.orientation), n.child_count,
                       n.branch_weight, n.w_estimate);
    for (std::uint32_t c = 0; c < n.child_count; ++c) self(self, g + 1, n.first_child + c);
  };
  rec(rec, 0, 0);
  return out;
}

// ---------------------------------------------------------------------------

bool ComparisonReport::pass() const noexcept {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

ComparisonCheck make_check(std::string name, Estimate engine, Estimate oracle) {
  ComparisonCheck c{std::move(name), engine, oracle, false};
  if (engine.count < 2 || oracle.count < 2) return c;
  const double se = std::hypot(engine.standard_error, oracle.standard_error);
  c.pass = within_se(engine.value, oracle.value, se);
  return c;
}

}  // namespace

ComparisonReport compare_with_engine(const ModelSpec& engine_model, const ModelSpec& oracle_model,
                                     const ComparisonOptions& options) {
  ComparisonReport report;
  report.oracle_depth = options.depth;

  // Engine side.
  Simulator sim(engine_model, StartMode::FixedOrigin, options.seed);
  const SpectralSummary& es = sim.spectral();
  const double ratio = static_cast<double>(options.engine_steps) / static_cast<double>(options.min_crossings);
  const int level = ratio > 1.0 ? static_cast<int>(std::floor(std::log(ratio) / std::log(es.mu))) : 0;
  report.engine_level = level;
  const std::size_t L = static_cast<std::size_t>(level);

  std::array<SizeTally, 2> engine_sizes;
  sim.set_family_observer([&](std::size_t, const Family& f) {
    engine_sizes[index(f.pattern.back())].add(static_cast<double>(f.pattern.size()));
  });
  std::array<RunningStats, 2> engine_w;
  double acc = 0.0;
  for (std::uint64_t k = 0; k < options.engine_steps; ++k) {
    const SamplePoint p = sim.next();
    const auto& levels = sim.state().levels;
    const std::size_t top = levels.size() - 1;
    double prod = 1.0;
    for (std::size_t j = 0; j < L && j <= top; ++j) prod *= levels[j].weight();
    acc += es.v(p.orientation) * prod;
    if (L > 0) {
      if (L - 1 > top) continue;
      bool complete = true;
      for (std::size_t j = 0; j < L && complete; ++j) complete = levels[j].exhausted();
      if (!complete) continue;
    }
    // The spine crossing is conditioned on its first-crossing line; skip it.
    const bool spine = L > top || levels[L].kappa == 1;
    const Orientation o = L <= top ? levels[L].orientation() : levels[L - 1].family.pattern.back();
    if (!spine) engine_w[index(o)].add(acc);
    acc = 0.0;
  }

  // Oracle side: independent roots, half of each orientation in expectation.
  const SpectralSummary os = spectral_summary(oracle_model);
  const std::size_t trees = options.oracle_trees;
  std::vector<double> roots(trees);
  std::vector<Orientation> root_orientation(trees);
  const unsigned threads = std::max(1u, options.threads);
  std::vector<std::array<SizeTally, 2>> sizes(threads);
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < trees; i += threads) {
      const std::uint64_t tree_seed = mix64(options.seed ^ (0xD1B54A32D192ED03ULL * (i + 1)));
      CounterRng structure = CounterRng::stream(tree_seed, 0);
      CounterRng weights = CounterRng::stream(tree_seed, 1);
      Walker w{oracle_model, os, structure, weights, std::vector<Family>(static_cast<std::size_t>(options.depth) + 1),
               &sizes[worker]};
      root_orientation[i] = structure.bernoulli(0.5) ? Orientation::Up : Orientation::Down;
      roots[i] = w.w(root_orientation[i], options.depth);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  std::array<RunningStats, 2> oracle_w;
  for (std::size_t i = 0; i < trees; ++i) oracle_w[index(root_orientation[i])].add(roots[i]);
  std::array<SizeTally, 2> oracle_sizes;
  for (const auto& s : sizes) {
    oracle_sizes[0].merge(s[0]);
    oracle_sizes[1].merge(s[1]);
  }

  for (Orientation o : kOrientations) {
    report.checks.push_back(make_check(fmt::format("normalized duration mean | {}", symbol(o)),
                                       to_estimate(engine_w[index(o)]), to_estimate(oracle_w[index(o)])));
  }
  for (Orientation o : kOrientations) {
    report.checks.push_back(make_check(fmt::format("family size mean | {}", symbol(o)),
                                       engine_sizes[index(o)].estimate(), oracle_sizes[index(o)].estimate()));
  }
  return report;
}

}  // namespace ebp
