// ebpsim: spectral reports, simulation, path analysis and oracle validation
// for embedded branching process models.
//
// Exit codes: 0 success, 1 other error, 2 parse or malformed input,
// 3 assumption failure, 4 validation failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ebp/analyze.hpp"
#include "ebp/config.hpp"
#include "ebp/engine.hpp"
#include "ebp/error.hpp"
#include "ebp/oracle.hpp"
#include "ebp/records.hpp"
#include "ebp/snapshot.hpp"

namespace {

using namespace ebp;

enum Exit { kOk = 0, kOther = 1, kParse = 2, kAssumption = 3, kValidation = 4 };

// EBPSIM_LOG = quiet | info (default) | debug.
int log_level() {
  static const int level = [] {
    const char* env = std::getenv("EBPSIM_LOG");
    if (!env) return 1;
    const std::string s(env);
    if (s == "quiet") return 0;
    if (s == "debug") return 2;
    return 1;
  }();
  return level;
}

template <class... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (log_level() >= 1) fmt::print(stderr, "ebpsim: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

template <class... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  if (log_level() >= 2) fmt::print(stderr, "ebpsim: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

struct ModelOptions {
  std::string builtin;
  std::vector<std::string> params;
  std::string file;

  void add(CLI::App* app, const std::string& prefix = "") {
    auto* b = app->add_option("--" + prefix + "builtin", builtin, "builtin model name");
    app->add_option("--" + prefix + "param", params, "builtin parameter key=value (repeatable)");
    auto* m = app->add_option("--" + prefix + "model", file, "model configuration file");
    b->excludes(m);
  }

  bool given() const { return !builtin.empty() || !file.empty(); }

  ModelSpec load() const {
    if (!file.empty()) return load_model_config(file);
    if (builtin.empty()) throw Error(ErrorCode::ParseError, "give --builtin NAME or --model FILE");
    ModelParams p;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ParseError, fmt::format("parameter '{}' is not key=value", kv));
      p[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return builtin_model(builtin, p);
  }
};

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidModel:
    case ErrorCode::UnknownModel:
    case ErrorCode::MalformedPath:
    case ErrorCode::SnapshotError:
      return kParse;
    case ErrorCode::DegenerateFirstCrossing:
      return kAssumption;
    default:
      return kOther;
  }
}

void print_check(std::string_view name, const AssumptionCheck& c) {
  fmt::print("{}: {} (value {:.17g})\n  {}\n", name, to_string(c.status), c.value, c.evidence);
}

int cmd_spectral(const ModelOptions& mo) {
  const ModelSpec model = mo.load();
  for (const auto& w : model.warnings()) fmt::print("warning: {}\n", w);
  const AssumptionReport report = check_assumptions(model);
  std::optional<SpectralSummary> s;
  try {
    s = spectral_summary(model);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFirstCrossing) throw;
    fmt::print("first crossing: {}\n", e.what());
  }
  fmt::print("model: {}\n", model.name().empty() ? "(unnamed)" : model.name());
  fmt::print("mu+ = {:.17g}\nmu- = {:.17g}\n", report.mu_plus, report.mu_minus);
  if (s) {
    fmt::print("mu = {:.17g}\nH = {:.17g}\n", s->mu, s->hurst);
    fmt::print("M0 = [[{:.17g}, {:.17g}], [{:.17g}, {:.17g}]]\n", s->m0(0, 0), s->m0(0, 1), s->m0(1, 0), s->m0(1, 1));
    fmt::print("M(1) = [[{:.17g}, {:.17g}], [{:.17g}, {:.17g}]]\n", s->m1(0, 0), s->m1(0, 1), s->m1(1, 0),
               s->m1(1, 1));
    fmt::print("mu(1) = {:.17g}\n", s->mu_at_one);
    fmt::print("u = ({:.17g}, {:.17g})\nv = ({:.17g}, {:.17g})\n", s->left_u(0), s->left_u(1), s->right_v(0),
               s->right_v(1));
    fmt::print("P(first Up | Up) = {:.17g}\nP(first Up | Down) = {:.17g}\n", s->first_up_given_up,
               s->first_up_given_down);
    fmt::print("a = {:.17g}{}\n", s->fixed_point_a, s->first_crossing_overridden ? " (override)" : "");
  }
  if (model.normalization_factor() != 1.0) fmt::print("weight normalization factor = {:.17g}\n", model.normalization_factor());
  fmt::print("mu'(1) = {:.17g} ({})\n", report.mu_prime_at_one,
             report.mu_prime_closed_form ? "closed form" : "central difference");
  for (const auto& [delta, value] : report.delta_grid) fmt::print("mu({:g}) = {:.17g}\n", delta, value);
  print_check("assumption 1", report.a1);
  print_check("assumption 2", report.a2);
  print_check("assumption 3", report.a3);
  print_check("assumption 4", report.a4);
  return report.all_pass() ? kOk : kAssumption;
}

struct SimulateOptions {
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> seed;
  bool random_start = false;
  std::string out;
  std::string format = "ndjson";
  std::string snapshot;
  std::string resume;
  unsigned replicas = 1;
  bool force = false;
};

// Buffered writer over a FILE*.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") {
      file_ = stdout;
    } else {
      file_ = std::fopen(path.c_str(), "wb");
      owned_ = true;
      if (!file_) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path));
    }
    path_ = path.empty() ? "<stdout>" : path;
  }
  ~Output() {
    if (owned_ && file_) std::fclose(file_);
  }
  Output(const Output&) = delete;
  Output& operator=(const Output&) = delete;

  void write(std::string_view s) {
    buffer_ += s;
    if (buffer_.size() > (1u << 16)) flush();
  }
  void flush() {
    if (!buffer_.empty() && std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size())
      throw Error(ErrorCode::IoError, fmt::format("write to {} failed", path_));
    buffer_.clear();
    if (std::fflush(file_) != 0) throw Error(ErrorCode::IoError, fmt::format("write to {} failed", path_));
  }

 private:
  std::FILE* file_ = nullptr;
  bool owned_ = false;
  std::string path_;
  std::string buffer_;
};

void simulate_one(Simulator& sim, const SimulateOptions& so, RecordFormat format, const std::string& out_path,
                  const std::string& snapshot_path, bool header) {
  Output out(out_path);
  if (header && format == RecordFormat::Csv) out.write(csv_header());
  std::size_t deepest = sim.depth();
  sim.run(so.steps, [&](const SamplePoint& p) {
    out.write(format_record(p, format));
    deepest = std::max(deepest, sim.depth());
  });
  out.flush();
  debug("{} steps, deepest level {}", so.steps, deepest);
  if (!snapshot_path.empty()) write_snapshot_file(sim, snapshot_path);
}

int cmd_simulate(const ModelOptions& mo, const SimulateOptions& so) {
  const RecordFormat format = parse_record_format(so.format);
  if (!so.resume.empty()) {
    if (mo.given() || so.seed || so.random_start)
      throw Error(ErrorCode::ParseError, "--resume takes the model, seed and mode from the snapshot");
    if (so.replicas != 1) throw Error(ErrorCode::ParseError, "--resume runs a single replica");
    Simulator sim = read_snapshot_file(so.resume);
    simulate_one(sim, so, format, so.out, so.snapshot, false);
    return kOk;
  }
  if (!so.seed) throw Error(ErrorCode::ParseError, "--seed is required");
  const ModelSpec model = mo.load();
  for (const auto& w : model.warnings()) info("warning: {}", w);
  const AssumptionReport report = check_assumptions(model);
  if (report.any_fail()) {
    if (!so.force) {
      info("model fails an assumption; run `spectral` for details or pass --force");
      return kAssumption;
    }
    info("model fails an assumption; continuing because of --force");
  }
  const StartMode mode = so.random_start ? StartMode::RandomStart : StartMode::FixedOrigin;
  if (so.replicas == 1) {
    Simulator sim(model, mode, *so.seed);
    simulate_one(sim, so, format, so.out, so.snapshot, true);
    return kOk;
  }
  if (so.out.empty()) throw Error(ErrorCode::ParseError, "--replicas needs --out");
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(so.replicas);
  const unsigned workers = std::max(1u, std::min(so.replicas, std::thread::hardware_concurrency()));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (unsigned r = w; r < so.replicas; r += workers) {
        try {
          Simulator sim(model, mode, mix64(*so.seed + r));
          simulate_one(sim, so, format, fmt::format("{}.{}", so.out, r),
                       so.snapshot.empty() ? "" : fmt::format("{}.{}", so.snapshot, r), true);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return kOk;
}

struct AnalyzeOptions {
  std::string in;
  int levels = 8;
  std::vector<int> scale;
};

int cmd_analyze(const ModelOptions& mo, const AnalyzeOptions& ao) {
  std::vector<SamplePoint> records;
  if (ao.in.empty() || ao.in == "-") {
    records = read_records(std::cin);
  } else {
    std::ifstream f(ao.in);
    if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", ao.in));
    records = read_records(f);
  }
  if (records.empty()) throw Error(ErrorCode::MalformedPath, "no records");
  // The path starts at the origin, one crossing before the first record.
  std::vector<double> t{records.front().t - records.front().duration};
  std::vector<std::int64_t> y{0};
  for (const auto& r : records) {
    t.push_back(r.t);
    y.push_back(r.y);
  }
  if (t.front() != 0.0) info("note: first record does not start at time 0 (resumed stream?)");
  const ExtractedTree tree = extract_crossing_tree(t, y, ao.levels);
  const EstimateReport rep = estimate(tree);
  fmt::print("crossings = {}\n", records.size());
  fmt::print("levels = {}\n", tree.max_level());
  fmt::print("duration_mean_up = {:.17g} se {:.6g} n {}\n", rep.level0_duration[0].value,
             rep.level0_duration[0].standard_error, rep.level0_duration[0].count);
  fmt::print("duration_mean_down = {:.17g} se {:.6g} n {}\n", rep.level0_duration[1].value,
             rep.level0_duration[1].standard_error, rep.level0_duration[1].count);
  for (const auto& l : rep.levels) {
    fmt::print("level {}: crossings {} mu_hat {:.17g} se {:.6g} duration_up {:.6g} duration_down {:.6g} "
               "max_share {:.6g} discarded {}\n",
               l.level, l.mu_hat.count, l.mu_hat.value, l.mu_hat.standard_error, l.duration[0].value,
               l.duration[1].value, l.max_duration_share, tree.discarded[static_cast<std::size_t>(l.level - 1)]);
  }
  fmt::print("mu_hat = {:.17g} se {:.6g}\n", rep.pooled_mu_hat.value, rep.pooled_mu_hat.standard_error);
  fmt::print("hurst_hat = {:.17g}\n", rep.hurst_hat);
  if (!ao.scale.empty()) {
    if (ao.scale.size() != 2) throw Error(ErrorCode::ParseError, "--scale takes two levels");
    const ModelSpec model = mo.load();
    const auto s = scale_invariance_check(tree, ao.scale[0], ao.scale[1], model);
    fmt::print("scale_ratio = {:.17g} se {:.6g} expected {:.17g} {}\n", s.ratio.value, s.ratio.standard_error,
               s.expected_ratio, s.pass ? "pass" : "fail");
    fmt::print("log_shift = {:.17g} se {:.6g} prediction {:.17g} (informational)\n", s.log_shift.value,
               s.log_shift.standard_error, s.log_shift_prediction);
  }
  return kOk;
}

struct ValidateOptions {
  std::uint64_t steps = 100000;
  std::size_t trees = 10000;
  int depth = 8;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

int cmd_validate(const ModelOptions& mo, const ModelOptions& oracle, const ValidateOptions& vo) {
  if (!vo.seed) throw Error(ErrorCode::ParseError, "--seed is required");
  const ModelSpec engine_model = mo.load();
  const ModelSpec oracle_model = oracle.given() ? oracle.load() : engine_model;
  ComparisonOptions opt;
  opt.engine_steps = vo.steps;
  opt.oracle_trees = vo.trees;
  opt.depth = vo.depth;
  opt.seed = *vo.seed;
  opt.threads = vo.threads ? vo.threads : std::max(1u, std::thread::hardware_concurrency());
  const ComparisonReport r = compare_with_engine(engine_model, oracle_model, opt);
  fmt::print("engine level = {}\noracle depth = {}\n", r.engine_level, r.oracle_depth);
  for (const auto& c : r.checks)
    fmt::print("{}: engine {:.17g} se {:.6g} n {} | oracle {:.17g} se {:.6g} n {} | {}\n", c.name, c.engine.value,
               c.engine.standard_error, c.engine.count, c.oracle.value, c.oracle.standard_error, c.oracle.count,
               c.pass ? "pass" : "fail");
  fmt::print("result: {}\n", r.pass() ? "pass" : "fail");
  return r.pass() ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedded branching process simulator"};
  app.require_subcommand(1);

  ModelOptions model;
  ModelOptions oracle_model;

  auto* spectral = app.add_subcommand("spectral", "Spectral quantities and assumption checks");
  model.add(spectral);

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Stream level-0 crossings");
  model.add(simulate);
  simulate->add_option("--steps", so.steps, "number of crossings to emit")->required();
  simulate->add_option("--seed", so.seed, "random seed (required unless resuming)");
  simulate->add_flag("--random-start", so.random_start, "start at a size-biased typical time");
  simulate->add_option("--out", so.out, "output file (default stdout)");
  simulate->add_option("--format", so.format, "ndjson or csv")->check(CLI::IsMember({"ndjson", "csv"}));
  simulate->add_option("--snapshot", so.snapshot, "write the final state here");
  simulate->add_option("--resume", so.resume, "continue from a snapshot");
  simulate->add_option("--replicas", so.replicas, "independent replicas written to <out>.<r>")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--force", so.force, "simulate even if an assumption fails");

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Crossing-tree estimates from a record stream");
  model.add(analyze);
  analyze->add_option("--in", ao.in, "record file (default stdin)");
  analyze->add_option("--levels", ao.levels, "highest level to extract");
  analyze->add_option("--scale", ao.scale, "two levels for the scale-invariance check (needs a model)")
      ->expected(2);

  ValidateOptions vo;
  auto* validate = app.add_subcommand("validate", "Compare the engine with the brute-force oracle");
  model.add(validate);
  oracle_model.add(validate, "oracle-");
  validate->add_option("--steps", vo.steps, "engine crossings");
  validate->add_option("--trees", vo.trees, "oracle trees");
  validate->add_option("--depth", vo.depth, "oracle tree depth");
  validate->add_option("--seed", vo.seed, "random seed")->required();
  validate->add_option("--threads", vo.threads, "oracle worker threads (default: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*spectral) return cmd_spectral(model);
    if (*simulate) return cmd_simulate(model, so);
    if (*analyze) return cmd_analyze(model, ao);
    if (*validate) return cmd_validate(model, oracle_model, vo);
  } catch (const Error& e) {
    fmt::print(stderr, "ebpsim: {}\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "ebpsim: {}\n", e.what());
    return kOther;
  }
  return kOther;
}
