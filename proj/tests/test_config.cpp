#include <doctest.h>

#include <string>

#include "ebp/config.hpp"
#include "ebp/error.hpp"

using namespace ebp;

namespace {

void check_same_spectrum(const ModelSpec& a, const ModelSpec& b) {
  const SpectralSummary x = spectral_summary(a);
  const SpectralSummary y = spectral_summary(b);
  CHECK(x.m0 == y.m0);
  CHECK(x.m1 == y.m1);
  CHECK(x.fixed_point_a == y.fixed_point_a);
  CHECK(x.right_v == y.right_v);
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_model_config(text, "test.ini");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("geometric config") {
  const ModelSpec m = parse_model_config(R"(
[model]
name = geo
[orientation_law]
family = geometric
p = 0.6     # as in the gamma example
[weight_law]
mode = iid
family = gamma
shape = 2
)");
  CHECK(m.name() == "geo");
  check_same_spectrum(m, builtin_model("figure4"));
}

TEST_CASE("per-parent keys and tables") {
  const ModelSpec skew = parse_model_config(R"(
[orientation_law]
family = geometric
p_up = 0.5
p_down = 0.4
[weight_law]
mode = constant
)");
  check_same_spectrum(skew, builtin_model("skewed"));

  const ModelSpec table = parse_model_config(R"(
[orientation_law]
family = table
++ = 0.5
+-++ = 0.25
-+++ = 0.25
[weight_law]
mode = iid
family = gamma
shape = 2
)");
  check_same_spectrum(table, builtin_model("table3"));
  const auto& down = std::get<PatternTable>(table.orientation_law().law(Orientation::Down));
  CHECK(down.patterns.size() == 3);
  for (const auto& p : down.patterns) CHECK(validate_pattern(p, Orientation::Down));
}

TEST_CASE("canonical text round-trips every builtin") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const ModelSpec m = builtin_model(name);
    const std::string text = model_to_config(m);
    const ModelSpec back = parse_model_config(text);
    check_same_spectrum(m, back);
    CHECK(model_to_config(back) == text);
  }
}

TEST_CASE("errors carry the line number") {
  try {
    parse_model_config("[orientation_law]\nfamily = geometric\np = banana\n", "bad.ini");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("bad.ini:3") != std::string::npos);
  }
  CHECK(code_of("[nonsense]\nx = 1\n") == ErrorCode::ParseError);
  CHECK(code_of("[orientation_law]\nfamily = geometric\np = 1.5\n") == ErrorCode::ParseError);
  CHECK(code_of("[orientation_law]\nfamily = table\n+--+ = 1\n") == ErrorCode::ParseError);
  CHECK(code_of("no section = 1\n") == ErrorCode::ParseError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_model_config("/nonexistent/model.ini"), Error);
}
