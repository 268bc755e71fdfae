#include <charconv>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ebp/error.hpp"
#include "ebp/model.hpp"

namespace ebp {

namespace {

class Params {
 public:
  Params(std::string_view model, const ModelParams& p, std::set<std::string, std::less<>> allowed)
      : model_(model), params_(p) {
    for (const auto& [key, value] : p)
      if (!allowed.count(key))
        throw Error(ErrorCode::InvalidModel, fmt::format("builtin {} has no parameter '{}'", model, key));
  }

  double number(std::string_view key, double fallback) const {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    double x = 0.0;
    const auto* end = it->second.data() + it->second.size();
    auto [ptr, ec] = std::from_chars(it->second.data(), end, x);
    if (ec != std::errc() || ptr != end)
      throw Error(ErrorCode::InvalidModel,
                  fmt::format("builtin {}: parameter {} = '{}' is not a number", model_, key, it->second));
    return x;
  }

  std::string text(std::string_view key, std::string_view fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? std::string(fallback) : it->second;
  }

 private:
  std::string_view model_;
  const ModelParams& params_;
};

// weights = constant | gamma | lognormal, with shape / sigma.
WeightLaw weight_choice(const Params& p, std::string_view fallback, double shape) {
  const std::string family = p.text("weights", fallback);
  if (family == "constant") return {ConstantReciprocalMu{}, true};
  if (family == "gamma") {
    const auto d = WeightDistribution::gamma(p.number("shape", shape), 1.0);
    return {IidWeights{{d, d}, false}, true};
  }
  if (family == "lognormal") {
    const auto d = WeightDistribution::lognormal(0.0, p.number("sigma", 0.5));
    return {IidWeights{{d, d}, false}, true};
  }
  throw Error(ErrorCode::InvalidModel, fmt::format("unknown weight family '{}'", family));
}

PatternTable parse_table(std::initializer_list<std::pair<const char*, double>> rows) {
  PatternTable t;
  for (const auto& [text, p] : rows) {
    t.patterns.push_back(*OffspringPattern::parse(text));
    t.probabilities.push_back(p);
  }
  return t;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"brownian", "figure4", "binary-cascade", "skewed", "table3", "table3-fixed"};
}

ModelSpec builtin_model(std::string_view name, const ModelParams& params) {
  if (name == "brownian") {
    Params p(name, params, {"p", "weights", "shape", "sigma"});
    const GeometricExcursions g{p.number("p", 0.5), 0.5};
    return ModelSpec::create(OrientationLaw::symmetric(g), weight_choice(p, "constant", 1.0), std::nullopt,
                             "brownian");
  }
  if (name == "figure4") {
    Params p(name, params, {"p", "weights", "shape", "sigma"});
    const GeometricExcursions g{p.number("p", 0.6), 0.5};
    return ModelSpec::create(OrientationLaw::symmetric(g), weight_choice(p, "gamma", 2.0), std::nullopt,
                             "figure4");
  }
  if (name == "binary-cascade") {
    Params p(name, params, {"weights", "shape", "sigma", "a"});
    const ConstantExcursions c{0, 0.5};
    auto spec = ModelSpec::create(OrientationLaw::symmetric(c), weight_choice(p, "gamma", 2.0),
                                  p.number("a", 0.5), "binary-cascade");
    return spec;
  }
  if (name == "skewed") {
    Params p(name, params, {"p_up", "p_down", "weights", "shape", "sigma"});
    const GeometricExcursions up{p.number("p_up", 0.5), 0.5};
    const GeometricExcursions down{p.number("p_down", 0.4), 0.5};
    return ModelSpec::create(OrientationLaw(up, down), weight_choice(p, "constant", 1.0), std::nullopt,
                             "skewed");
  }
  if (name == "table3") {
    Params p(name, params, {"weights", "shape", "sigma"});
    const auto t = parse_table({{"++", 0.5}, {"+-++", 0.25}, {"-+++", 0.25}});
    return ModelSpec::create(OrientationLaw::symmetric(t), weight_choice(p, "gamma", 2.0), std::nullopt,
                             "table3");
  }
  if (name == "table3-fixed") {
    Params p(name, params, {});
    const auto t = parse_table({{"++", 0.5}, {"+-++", 0.25}, {"-+++", 0.25}});
    PerPatternWeights w;
    w.by_parent[0] = {{0.6, 0.4}, {0.3, 0.2, 0.25, 0.25}, {0.1, 0.3, 0.3, 0.3}};
    w.by_parent[1] = {{0.5, 0.5}, {0.4, 0.1, 0.2, 0.3}, {0.25, 0.25, 0.25, 0.25}};
    return ModelSpec::create(OrientationLaw::symmetric(t), {w, true}, std::nullopt, "table3-fixed");
  }
  throw Error(ErrorCode::UnknownModel,
              fmt::format("unknown builtin model '{}' (known: {})", name, fmt::join(builtin_names(), ", ")));
}

}  // namespace ebp
