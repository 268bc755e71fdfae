#include "ebp/snapshot.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ebp/config.hpp"
#include "ebp/error.hpp"

namespace ebp {

namespace {

using nlohmann::json;

// Doubles travel as strings: the JSON library's shortest round-trip output
// would also do, but strings keep the text independent of its formatter.
std::string encode(double x) { return fmt::format("{:.17g}", x); }

double decode(const json& j) {
  const std::string s = j.get<std::string>();
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size()) throw Error(ErrorCode::SnapshotError, fmt::format("bad number '{}'", s));
  return x;
}

json rng_to_json(const CounterRng& r) { return {{"key", r.key()}, {"counter", r.counter()}}; }

CounterRng rng_from_json(const json& j) {
  return CounterRng(j.at("key").get<std::uint64_t>(), j.at("counter").get<std::uint64_t>());
}

}  // namespace

std::string save_snapshot(const Simulator& sim) {
  const SimulatorState& s = sim.state();
  json levels = json::array();
  for (const auto& l : s.levels) {
    json w = json::array();
    for (double x : l.family.weights) w.push_back(encode(x));
    levels.push_back({{"pattern", l.family.pattern.to_string()}, {"weights", w}, {"kappa", l.kappa}, {"s", l.s}});
  }
  json spine = json::array();
  for (double x : s.spine_weights) spine.push_back(encode(x));
  json j = {
      {"format", "ebp-snapshot"},
      {"version", kSnapshotVersion},
      {"mode", s.mode == StartMode::FixedOrigin ? "fixed-origin" : "random-start"},
      {"model", model_to_config(sim.model())},
      {"k", s.k},
      {"t", encode(s.t)},
      {"y", s.y},
      {"pending_initial", s.pending_initial},
      {"rng", {{"structure", rng_to_json(s.structure)}, {"weights", rng_to_json(s.weights)}}},
      {"levels", levels},
      {"spine_weights", spine},
  };
  return j.dump(1) + "\n";
}

Simulator load_snapshot(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "ebp-snapshot") throw Error(ErrorCode::SnapshotError, "not a simulator snapshot");
    if (j.at("version") != kSnapshotVersion)
      throw Error(ErrorCode::SnapshotError, fmt::format("unsupported snapshot version {}", j.at("version").dump()));
    ModelSpec model = parse_model_config(j.at("model").get<std::string>(), "<snapshot model>");
    SimulatorState s;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "fixed-origin")
      s.mode = StartMode::FixedOrigin;
    else if (mode == "random-start")
      s.mode = StartMode::RandomStart;
    else
      throw Error(ErrorCode::SnapshotError, fmt::format("unknown mode '{}'", mode));
    s.k = j.at("k").get<std::uint64_t>();
    s.t = decode(j.at("t"));
    s.y = j.at("y").get<std::int64_t>();
    s.pending_initial = j.at("pending_initial").get<bool>();
    s.structure = rng_from_json(j.at("rng").at("structure"));
    s.weights = rng_from_json(j.at("rng").at("weights"));
    for (const auto& l : j.at("levels")) {
      LevelState level;
      auto pattern = OffspringPattern::parse(l.at("pattern").get<std::string>());
      if (!pattern) throw Error(ErrorCode::SnapshotError, "bad pattern in snapshot");
      level.family.pattern = *pattern;
      for (const auto& w : l.at("weights")) level.family.weights.push_back(decode(w));
      level.kappa = l.at("kappa").get<std::uint64_t>();
      level.s = l.at("s").get<std::uint32_t>();
      s.levels.push_back(std::move(level));
    }
    for (const auto& w : j.at("spine_weights")) s.spine_weights.push_back(decode(w));
    return Simulator(std::move(model), std::move(s));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SnapshotError, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::SnapshotError, e.what());
  }
}

void write_snapshot_file(const Simulator& sim, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out << save_snapshot(sim);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write to {} failed", path.string()));
}

Simulator read_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_snapshot(ss.str());
}

}  // namespace ebp
