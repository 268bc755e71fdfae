#include "ebp/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "ebp/error.hpp"

namespace ebp {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  bool used = false;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Section {
 public:
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  Entry* find(std::string_view key) {
    for (auto& e : entries)
      if (e.key == key) {
        e.used = true;
        return &e;
      }
    return nullptr;
  }
};

class Parser {
 public:
  Parser(std::string_view text, std::string_view source) : source_(source) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    Section* current = nullptr;
    while (std::getline(in, raw)) {
      ++line;
      std::string_view s = raw;
      if (auto c = s.find_first_of("#;"); c != std::string_view::npos) s = s.substr(0, c);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(line, "unterminated section header");
        const std::string name(trim(s.substr(1, s.size() - 2)));
        if (name != "model" && name != "orientation_law" && name != "weight_law")
          fail(line, fmt::format("unknown section [{}]", name));
        if (sections_.count(name)) fail(line, fmt::format("duplicate section [{}]", name));
        current = &sections_[name];
        current->name = name;
        current->line = line;
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) fail(line, "expected 'key = value'");
      if (!current) fail(line, "entry outside of any section");
      Entry e{std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))), line};
      if (e.key.empty()) fail(line, "empty key");
      for (const auto& other : current->entries)
        if (other.key == e.key)
          fail(line, fmt::format("duplicate key '{}' (first on line {})", e.key, other.line));
      current->entries.push_back(std::move(e));
    }
  }

  [[noreturn]] void fail(int line, std::string_view what) const {
    throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", source_, line, what));
  }

  Section& section(const std::string& name) {
    auto it = sections_.find(name);
    if (it == sections_.end()) {
      static const std::map<std::string, int> required{{"orientation_law", 1}, {"weight_law", 1}};
      if (required.count(name)) fail(0, fmt::format("missing section [{}]", name));
      sections_[name].name = name;
      return sections_[name];
    }
    return it->second;
  }

  double number(const Entry& e) const {
    double x = 0.0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, x);
    if (ec != std::errc() || ptr != end) fail(e.line, fmt::format("'{}' is not a number", e.value));
    return x;
  }

  bool boolean(const Entry& e) const {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(e.line, fmt::format("'{}' is not true or false", e.value));
  }

  std::vector<double> numbers(const Entry& e) const {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string tok;
    while (in >> tok) {
      Entry t = e;
      t.value = tok;
      out.push_back(number(t));
    }
    if (out.empty()) fail(e.line, "expected a list of numbers");
    return out;
  }

  // Key with a per-parent suffix, falling back to the bare key.
  Entry* lookup(Section& s, std::string_view key, Orientation parent) {
    const std::string suffixed = fmt::format("{}_{}", key, parent == Orientation::Up ? "up" : "down");
    if (Entry* e = s.find(suffixed)) return e;
    return s.find(key);
  }

  double number_or(Section& s, std::string_view key, Orientation parent, double fallback) {
    Entry* e = lookup(s, key, parent);
    return e ? number(*e) : fallback;
  }

  void reject_unused(Section& s, bool allow_patterns) {
    for (const auto& e : s.entries) {
      if (e.used) continue;
      if (allow_patterns && OffspringPattern::parse(e.key)) continue;
      fail(e.line, fmt::format("unknown key '{}' in [{}]", e.key, s.name));
    }
  }

  ModelSpec build() {
    Section& model = section("model");
    std::string name;
    std::optional<double> first_crossing;
    if (Entry* e = model.find("name")) name = e->value;
    if (Entry* e = model.find("first_crossing")) first_crossing = number(*e);
    reject_unused(model, false);

    Section& ol = section("orientation_law");
    std::array<ExcursionLaw, 2> laws;
    std::array<bool, 2> table_given{false, false};
    for (Orientation parent : kOrientations) {
      Entry* fam = lookup(ol, "family", parent);
      if (!fam) fail(ol.line, "[orientation_law] needs 'family'");
      if (fam->value == "geometric") {
        laws[index(parent)] = GeometricExcursions{number_or(ol, "p", parent, 0.5),
                                                  number_or(ol, "updown", parent, 0.5)};
      } else if (fam->value == "constant") {
        const double c = number_or(ol, "count", parent, 0.0);
        if (c < 0 || c != static_cast<double>(static_cast<std::uint32_t>(c)))
          fail(fam->line, "count must be a nonnegative integer");
        laws[index(parent)] = ConstantExcursions{static_cast<std::uint32_t>(c), number_or(ol, "updown", parent, 0.5)};
      } else if (fam->value == "table") {
        PatternTable t;
        for (auto& e : ol.entries) {
          auto pattern = OffspringPattern::parse(e.key);
          if (!pattern) continue;
          e.used = true;
          if (pattern->back() != parent) continue;
          t.patterns.push_back(*pattern);
          t.probabilities.push_back(number(e));
          rows_[index(parent)].push_back(e.line);
        }
        table_given[index(parent)] = !t.patterns.empty();
        laws[index(parent)] = std::move(t);
      } else {
        fail(fam->line, fmt::format("unknown orientation family '{}'", fam->value));
      }
    }
    // A table given for one parent only is mirrored to the other.
    for (Orientation parent : kOrientations) {
      auto* t = std::get_if<PatternTable>(&laws[index(parent)]);
      auto* other = std::get_if<PatternTable>(&laws[index(flip(parent))]);
      if (t && t->patterns.empty() && other && table_given[index(flip(parent))]) {
        for (std::size_t r = 0; r < other->patterns.size(); ++r) {
          std::vector<Orientation> seq;
          for (Orientation o : other->patterns[r].orientations()) seq.push_back(flip(o));
          t->patterns.push_back(*OffspringPattern::from_orientations(seq));
          t->probabilities.push_back(other->probabilities[r]);
        }
        mirrored_[index(parent)] = true;
      } else if (t && t->patterns.empty()) {
        fail(ol.line, fmt::format("table law has no rows for parent {}", symbol(parent)));
      }
    }
    reject_unused(ol, false);

    Section& wl = section("weight_law");
    WeightLaw weights;
    if (Entry* e = wl.find("normalize")) weights.normalize = boolean(*e);
    Entry* mode = wl.find("mode");
    if (!mode) fail(wl.line, "[weight_law] needs 'mode'");
    if (mode->value == "constant") {
      weights.mode = ConstantReciprocalMu{};
    } else if (mode->value == "iid") {
      IidWeights iid;
      if (Entry* e = wl.find("orientation_dependent")) iid.orientation_dependent = boolean(*e);
      for (Orientation parent : kOrientations) {
        if (!iid.orientation_dependent && parent == Orientation::Down) break;
        const Orientation key = iid.orientation_dependent ? parent : Orientation::Up;
        auto get = [&](std::string_view k) -> Entry* {
          return iid.orientation_dependent ? lookup(wl, k, key) : wl.find(k);
        };
        Entry* fam = get("family");
        if (!fam) fail(wl.line, "iid weights need 'family'");
        auto need = [&](std::string_view k) {
          Entry* e = get(k);
          if (!e) fail(fam->line, fmt::format("{} weights need '{}'", fam->value, k));
          return number(*e);
        };
        auto opt = [&](std::string_view k, double fallback) {
          Entry* e = get(k);
          return e ? number(*e) : fallback;
        };
        WeightDistribution d;
        if (fam->value == "deterministic")
          d = WeightDistribution::deterministic(need("value"));
        else if (fam->value == "gamma")
          d = WeightDistribution::gamma(need("shape"), opt("scale", 1.0));
        else if (fam->value == "lognormal")
          d = WeightDistribution::lognormal(opt("mu", 0.0), need("sigma"));
        else
          fail(fam->line, fmt::format("unknown weight family '{}'", fam->value));
        iid.by_parent[index(parent)] = d;
      }
      weights.mode = iid;
    } else if (mode->value == "table") {
      PerPatternWeights table;
      for (Orientation parent : kOrientations) {
        const auto* t = std::get_if<PatternTable>(&laws[index(parent)]);
        if (!t) fail(mode->line, "table weights require a table orientation law");
        for (const auto& pattern : t->patterns) {
          Entry* e = wl.find(pattern.to_string());
          if (!e && mirrored_[index(parent)]) {
            std::string flipped = pattern.to_string();
            for (char& c : flipped) c = c == '+' ? '-' : '+';
            e = wl.find(flipped);
          }
          if (!e) fail(wl.line, fmt::format("no weights given for pattern {}", pattern.to_string()));
          table.by_parent[index(parent)].push_back(numbers(*e));
        }
      }
      weights.mode = std::move(table);
    } else {
      fail(mode->line, fmt::format("unknown weight mode '{}'", mode->value));
    }
    reject_unused(wl, false);

    try {
      return ModelSpec::create(OrientationLaw(std::move(laws[0]), std::move(laws[1])), std::move(weights),
                               first_crossing, name);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidModel) throw;
      throw Error(ErrorCode::ParseError, fmt::format("{}: {}", source_, e.what()));
    }
  }

 private:
  std::string source_;
  std::map<std::string, Section> sections_;
  std::array<std::vector<int>, 2> rows_;
  std::array<bool, 2> mirrored_{false, false};
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

}  // namespace

ModelSpec parse_model_config(std::string_view text, std::string_view source) {
  Parser p(text, source);
  return p.build();
}

ModelSpec load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str(), path.string());
}

std::string model_to_config(const ModelSpec& model) {
  std::string out = "[model]\n";
  if (!model.name().empty()) out += fmt::format("name = {}\n", model.name());
  if (model.first_crossing_override()) out += fmt::format("first_crossing = {}\n", num(*model.first_crossing_override()));

  out += "\n[orientation_law]\n";
  std::string rows;
  for (Orientation parent : kOrientations) {
    const char* sfx = parent == Orientation::Up ? "up" : "down";
    const auto& law = model.orientation_law().law(parent);
    if (const auto* g = std::get_if<GeometricExcursions>(&law)) {
      out += fmt::format("family_{0} = geometric\np_{0} = {1}\nupdown_{0} = {2}\n", sfx, num(g->stop_probability),
                         num(g->updown_probability));
    } else if (const auto* c = std::get_if<ConstantExcursions>(&law)) {
      out += fmt::format("family_{0} = constant\ncount_{0} = {1}\nupdown_{0} = {2}\n", sfx, c->count,
                         num(c->updown_probability));
    } else {
      const auto& t = std::get<PatternTable>(law);
      out += fmt::format("family_{} = table\n", sfx);
      for (std::size_t r = 0; r < t.patterns.size(); ++r)
        rows += fmt::format("{} = {}\n", t.patterns[r].to_string(), num(t.probabilities[r]));
    }
  }
  out += rows;

  out += "\n[weight_law]\nnormalize = false\n";
  const auto& mode = model.weight_law().mode;
  if (std::holds_alternative<ConstantReciprocalMu>(mode)) {
    out += "mode = constant\n";
  } else if (const auto* iid = std::get_if<IidWeights>(&mode)) {
    out += "mode = iid\norientation_dependent = true\n";
    for (Orientation parent : kOrientations) {
      const char* sfx = parent == Orientation::Up ? "up" : "down";
      const auto& d = iid->by_parent[index(parent)];
      switch (d.family) {
        case WeightFamily::Deterministic:
          out += fmt::format("family_{0} = deterministic\nvalue_{0} = {1}\n", sfx, num(d.first));
          break;
        case WeightFamily::Gamma:
          out += fmt::format("family_{0} = gamma\nshape_{0} = {1}\nscale_{0} = {2}\n", sfx, num(d.first),
                             num(d.second));
          break;
        case WeightFamily::Lognormal:
          out += fmt::format("family_{0} = lognormal\nmu_{0} = {1}\nsigma_{0} = {2}\n", sfx, num(d.first),
                             num(d.second));
          break;
      }
    }
  } else {
    out += "mode = table\n";
    const auto& table = std::get<PerPatternWeights>(mode);
    for (Orientation parent : kOrientations) {
      const auto& t = std::get<PatternTable>(model.orientation_law().law(parent));
      for (std::size_t r = 0; r < t.patterns.size(); ++r) {
        out += t.patterns[r].to_string() + " =";
        for (double w : table.by_parent[index(parent)][r]) out += " " + num(w);
        out += "\n";
      }
    }
  }
  return out;
}

}  // namespace ebp
