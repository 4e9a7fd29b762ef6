#include <string>

#include "doctest.h"
#include "wpi/config.hpp"

using namespace wpi;
using doctest::Approx;

namespace {

std::string error_of(const std::string& text, const std::string& command) {
  try {
    parse_config(text, command, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults fill every block") {
  for (const char* cmd : {"rate", "chain", "imh", "pm", "verify"}) {
    auto rc = parse_config("", cmd);
    CHECK(rc.command == cmd);
    CHECK(rc.doc.contains(cmd));
    CHECK(rc.doc[cmd] == default_block(cmd));
    CHECK(rc.seed == 1);
    CHECK(rc.format == "csv");
  }
  CHECK_THROWS_AS(parse_config("", "bogus"), ConfigError);
}

TEST_CASE("user values override defaults") {
  auto rc = parse_config(R"({"seed": 7, "out": "x", "format": "table", "rate": {"n_points": 5, "beta":
      {"type": "stretched_exp", "eta0": 1, "eta1": 2, "eta2": 0.5}}})",
                         "rate");
  CHECK(rc.seed == 7);
  CHECK(rc.out == "x");
  CHECK(rc.format == "table");
  CHECK(rc.doc["rate"]["n_points"] == 5);
  CHECK(rc.doc["rate"]["n_max"] == 1e6);
  auto b = beta_from_json(rc.doc["rate"]["beta"]);
  CHECK(b.kind() == "stretchedexp");
  // blocks for other commands are validated but not resolved
  auto rc2 = parse_config(R"({"imh": {"a1": 0.5}})", "rate");
  CHECK_FALSE(rc2.doc.contains("imh"));
}

TEST_CASE("variant is an alias for type") {
  Json a = Json::parse(R"({"variant": "polynomial", "c0": 2, "c1": 3})");
  Json b = Json::parse(R"({"type": "polynomial", "c0": 2, "c1": 3})");
  CHECK_NOTHROW(validate_beta_json(a, "beta"));
  for (double s : {0.5, 2.0, 10.0}) CHECK(beta_from_json(a)(s) == beta_from_json(b)(s));
  Json both = Json::parse(R"({"variant": "polynomial", "type": "polynomial", "c0": 2, "c1": 3})");
  CHECK_THROWS_AS(validate_beta_json(both, "beta"), ConfigError);
}

TEST_CASE("unknown keys and wrong types are rejected") {
  CHECK(error_of(R"({"rate": {"n_pionts": 5}})", "rate").find("rate.n_pionts: unknown key") != std::string::npos);
  CHECK(error_of(R"({"colour": 1})", "rate").find("unknown key 'colour'") != std::string::npos);
  CHECK(error_of(R"({"rate": {"n_points": "many"}})", "rate").find("expected a number") != std::string::npos);
  CHECK(error_of(R"({"rate": {"n_points": 2.5}})", "rate").find("expected an integer") != std::string::npos);
  CHECK(error_of(R"({"imh": {"simulate": 1}})", "imh").find("expected true or false") != std::string::npos);
  CHECK(error_of(R"({"verify": {"kinds": [1]}})", "verify").find("array entries must be strings") != std::string::npos);
  CHECK(error_of(R"({"seed": -1})", "rate").find("seed") != std::string::npos);
  CHECK(error_of(R"({"format": "xml"})", "rate").find("format") != std::string::npos);
  CHECK(error_of(R"({"rate": {"beta": {"type": "polynomial", "c0": 1}}})", "rate").find("c1") != std::string::npos);
  CHECK(error_of(R"({"rate": {"beta": {"type": "gaussian"}}})", "rate").find("unknown beta type") != std::string::npos);
  CHECK(error_of(R"({"rate": {"beta": {"type": "polynomial", "c0": 1, "c1": -1}}})", "rate") != "");
  CHECK(error_of(R"({"rate": {"mode": "sometimes"}})", "rate").find("mode must be one of") != std::string::npos);
  CHECK(error_of(R"({"chain": {"links": [{"type": "weak"}]}})", "chain").find("beta2: missing") != std::string::npos);
  CHECK(error_of(R"({"chain": {"links": [{"type": "teleport"}]}})", "chain").find("unknown link type") != std::string::npos);
  CHECK(error_of("[1, 2]", "rate").find("top level") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  std::string msg = error_of("{\n  \"seed\": 3,\n  \"rate\": {\"a\": }\n}", "rate");
  CHECK(msg.rfind("cfg.json:3:", 0) == 0);
  CHECK(msg.find("syntax error") != std::string::npos);
}

TEST_CASE("resolved document round-trips") {
  auto rc = parse_config(R"({"seed": 5, "chain": {"links": [{"type": "gap", "c_gap": 0.5}]}})", "chain");
  auto again = parse_config(rc.doc.dump(), "chain");
  CHECK(again.doc == rc.doc);
  CHECK(again.seed == 5);
  auto link = link_from_json(rc.doc["chain"]["links"][0], "l");
  CHECK(std::get<GapLink>(link).c_gap == Approx(0.5));
}

TEST_CASE("rate modes") {
  CHECK(rate_mode_from_string("fa", "m") == RateMode::Fa);
  CHECK(rate_mode_from_string("finf", "m") == RateMode::Finf);
  CHECK(rate_mode_from_string("auto", "m") == RateMode::Auto);
  CHECK_THROWS_AS(rate_mode_from_string("both", "m"), ConfigError);
}
