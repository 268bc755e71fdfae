#include "ebp/records.hpp"

#include <charconv>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ebp/error.hpp"

namespace ebp {

RecordFormat parse_record_format(std::string_view name) {
  if (name == "ndjson") return RecordFormat::Ndjson;
  if (name == "csv") return RecordFormat::Csv;
  throw Error(ErrorCode::ParseError, fmt::format("unknown record format '{}'", name));
}

std::string_view csv_header() noexcept { return "k,t,y,o,d\n"; }

std::string format_record(const SamplePoint& p, RecordFormat format) {
  if (format == RecordFormat::Ndjson)
    return fmt::format("{{\"k\":{},\"t\":{:.17g},\"y\":{},\"o\":\"{}\",\"d\":{:.17g}}}\n", p.k, p.t, p.y,
                       symbol(p.orientation), p.duration);
  return fmt::format("{},{:.17g},{},{},{:.17g}\n", p.k, p.t, p.y, symbol(p.orientation), p.duration);
}

namespace {

[[noreturn]] void malformed(std::size_t line, std::string_view what) {
  throw Error(ErrorCode::MalformedPath, fmt::format("record line {}: {}", line, what));
}

Orientation orientation_field(std::string_view s, std::size_t line) {
  if (s.size() == 1)
    if (auto o = orientation_from_symbol(s[0])) return *o;
  malformed(line, fmt::format("orientation '{}' is not + or -", s));
}

template <class T>
T parse_number(std::string_view s, std::size_t line) {
  T x{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed(line, fmt::format("'{}' is not a number", s));
  return x;
}

SamplePoint parse_json(const std::string& text, std::size_t line) {
  try {
    const auto j = nlohmann::json::parse(text);
    SamplePoint p;
    p.k = j.at("k").get<std::uint64_t>();
    p.t = j.at("t").get<double>();
    p.y = j.at("y").get<std::int64_t>();
    p.orientation = orientation_field(j.at("o").get<std::string>(), line);
    p.duration = j.at("d").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    malformed(line, e.what());
  }
}

SamplePoint parse_csv(std::string_view text, std::size_t line) {
  std::vector<std::string_view> f;
  for (;;) {
    const auto comma = text.find(',');
    f.push_back(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (f.size() != 5) malformed(line, "expected five comma-separated fields");
  SamplePoint p;
  p.k = parse_number<std::uint64_t>(f[0], line);
  p.t = parse_number<double>(f[1], line);
  p.y = parse_number<std::int64_t>(f[2], line);
  p.orientation = orientation_field(f[3], line);
  p.duration = parse_number<double>(f[4], line);
  return p;
}

}  // namespace

std::vector<SamplePoint> read_records(std::istream& in) {
  std::vector<SamplePoint> out;
  std::string raw;
  std::size_t line = 0;
  std::optional<RecordFormat> format;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    if (!format) {
      if (raw.front() == '{') {
        format = RecordFormat::Ndjson;
      } else {
        format = RecordFormat::Csv;
        if (raw + "\n" == csv_header()) continue;
      }
    }
    out.push_back(*format == RecordFormat::Ndjson ? parse_json(raw, line) : parse_csv(raw, line));
  }
  return out;
}

}  // namespace ebp
