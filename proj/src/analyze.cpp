#include "ebp/analyze.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ebp/error.hpp"

namespace ebp {

OffspringPattern ExtractedTree::pattern(int level, std::size_t i) const {
  const auto& c = levels[static_cast<std::size_t>(level)][i];
  std::vector<Orientation> seq;
  for (std::uint32_t j = 0; j < c.child_count; ++j)
    seq.push_back(levels[static_cast<std::size_t>(level) - 1][c.first_child + j].orientation);
  auto p = OffspringPattern::from_orientations(seq);
  return p ? *p : OffspringPattern{};
}

ExtractedTree extract_crossing_tree(std::span<const double> t, std::span<const std::int64_t> y, int max_level,
                                    int base_level) {
  if (t.size() != y.size()) throw Error(ErrorCode::MalformedPath, "times and levels differ in length");
  if (y.empty() || y[0] != 0) throw Error(ErrorCode::MalformedPath, "path must start at level 0");
  if (base_level < 0 || base_level > 60) throw Error(ErrorCode::MalformedPath, "base level out of range");
  const std::int64_t unit = std::int64_t{1} << base_level;

  ExtractedTree tree;
  tree.levels.emplace_back();
  auto& steps = tree.levels[0];
  steps.reserve(y.size());
  for (std::size_t k = 1; k < y.size(); ++k) {
    const std::int64_t dy = y[k] - y[k - 1];
    if (dy != unit && dy != -unit)
      throw Error(ErrorCode::MalformedPath, fmt::format("increment {} at point {} is not +-{}", dy, k, unit));
    if (!(t[k] > t[k - 1]))
      throw Error(ErrorCode::MalformedPath, fmt::format("time does not increase at point {}", k));
    steps.push_back({dy > 0 ? Orientation::Up : Orientation::Down, 0, 0, t[k - 1], t[k]});
  }

  for (int n = 0; n < max_level; ++n) {
    const auto& below = tree.levels[static_cast<std::size_t>(n)];
    const std::int64_t child_size = unit << n;
    const std::int64_t size = child_size * 2;
    std::vector<ExtractedCrossing> above;
    std::int64_t anchor = 0;
    std::int64_t position = 0;
    std::size_t first = 0;
    for (std::size_t i = 0; i < below.size(); ++i) {
      position += below[i].orientation == Orientation::Up ? child_size : -child_size;
      if (position % size == 0 && position != anchor) {
        above.push_back({position > anchor ? Orientation::Up : Orientation::Down, static_cast<std::uint32_t>(first),
                         static_cast<std::uint32_t>(i + 1 - first), below[first].start, below[i].end});
        anchor = position;
        first = i + 1;
      }
    }
    tree.discarded.push_back(below.size() - first);
    if (above.empty()) break;
    tree.levels.push_back(std::move(above));
  }
  return tree;
}

EstimateReport estimate(const ExtractedTree& tree) {
  EstimateReport r;
  r.discarded = tree.discarded;
  RunningStats pooled;
  const int top = tree.max_level();
  // Time covered by the complete top-level crossings.
  double horizon = 0.0;
  double total = 0.0;
  if (top >= 0 && !tree.levels[static_cast<std::size_t>(top)].empty()) {
    horizon = tree.levels[static_cast<std::size_t>(top)].back().end;
    total = horizon - tree.levels[static_cast<std::size_t>(top)].front().start;
  }
  auto duration_stats = [](const std::vector<ExtractedCrossing>& cs) {
    std::array<RunningStats, 2> s;
    for (const auto& c : cs) s[index(c.orientation)].add(c.duration());
    return std::array<Estimate, 2>{to_estimate(s[0]), to_estimate(s[1])};
  };
  auto max_share = [&](const std::vector<ExtractedCrossing>& cs) {
    double m = 0.0;
    for (const auto& c : cs)
      if (c.end <= horizon) m = std::max(m, c.duration());
    return total > 0.0 ? m / total : 0.0;
  };
  if (!tree.levels.empty()) r.level0_duration = duration_stats(tree.levels[0]);
  for (int n = 1; n <= top; ++n) {
    const auto& cs = tree.levels[static_cast<std::size_t>(n)];
    RunningStats z;
    for (const auto& c : cs) {
      z.add(c.child_count);
      pooled.add(c.child_count);
    }
    LevelEstimate e;
    e.level = n;
    e.mu_hat = to_estimate(z);
    e.duration = duration_stats(cs);
    e.max_duration_share = max_share(cs);
    r.levels.push_back(e);
  }
  r.pooled_mu_hat = to_estimate(pooled);
  r.hurst_hat = std::log(2.0) / std::log(r.pooled_mu_hat.value);
  return r;
}

namespace {

// Mean log branch weight, branches weighted by how often they occur.
double mean_log_branch_weight(const ModelSpec& model) {
  const auto& law = model.orientation_law();
  const auto& mode = model.weight_law().mode;
  double num = 0.0;
  double den = 0.0;
  for (Orientation parent : kOrientations) {
    const double branches = law.mean_size(parent);
    double mean_log = 0.0;
    if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
      mean_log = std::log(model.constant_weight());
    } else if (const auto* iid = std::get_if<IidWeights>(&mode)) {
      mean_log = iid->by_parent[index(parent)].mean_log();
    } else {
      const auto& rows = std::get<PerPatternWeights>(mode).by_parent[index(parent)];
      const auto& t = std::get<PatternTable>(law.law(parent));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (double w : rows[r]) mean_log += t.probabilities[r] * std::log(w);
      mean_log /= branches;
    }
    num += branches * mean_log;
    den += branches;
  }
  return num / den;
}

}  // namespace

ScaleInvarianceReport scale_invariance_check(const ExtractedTree& tree, int level_low, int level_high,
                                             const ModelSpec& model) {
  if (!(0 <= level_low && level_low < level_high))
    throw Error(ErrorCode::InsufficientData, "levels must satisfy 0 <= low < high");
  if (level_high > tree.max_level())
    throw Error(ErrorCode::InsufficientData, fmt::format("no crossings at level {}", level_high));
  const auto& lo = tree.levels[static_cast<std::size_t>(level_low)];
  const auto& hi = tree.levels[static_cast<std::size_t>(level_high)];
  if (lo.size() < kMinCrossingsForScaling || hi.size() < kMinCrossingsForScaling)
    throw Error(ErrorCode::InsufficientData,
                fmt::format("{} crossings at level {} and {} at level {}; need {} at each", lo.size(), level_low,
                            hi.size(), level_high, kMinCrossingsForScaling));
  RunningStats dl, dh, ll, lh;
  for (const auto& c : lo) {
    dl.add(c.duration());
    ll.add(std::log(c.duration()));
  }
  for (const auto& c : hi) {
    dh.add(c.duration());
    lh.add(std::log(c.duration()));
  }
  ScaleInvarianceReport r;
  r.level_low = level_low;
  r.level_high = level_high;
  const double ratio = dh.mean() / dl.mean();
  const double rel = std::hypot(dl.standard_error() / dl.mean(), dh.standard_error() / dh.mean());
  r.ratio = {ratio, ratio * rel, hi.size()};
  const SpectralSummary s = spectral_summary(model);
  r.expected_ratio = std::pow(s.mu, level_high - level_low);
  r.pass = within_se(r.ratio.value, r.expected_ratio, r.ratio.standard_error);
  const double gap = level_high - level_low;
  r.log_shift = {(lh.mean() - ll.mean()) / gap, std::hypot(ll.standard_error(), lh.standard_error()) / gap,
                 hi.size()};
  r.log_shift_prediction = -mean_log_branch_weight(model);
  return r;
}

}  // namespace ebp
