#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wpi/comparison.hpp"
#include "wpi/rate_core.hpp"

namespace wpi {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Commands: rate, chain, imh, pm, verify. The resolved document holds every
// top-level setting plus the block for `command` with defaults filled in.
struct RunConfig {
  std::string command;
  std::string subcommand;  // pm only
  Json doc;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";
  int threads = 0;
};

Json default_block(const std::string& command);
// Parses text (JSON), validates keys and types, merges defaults. `source`
// names the input in messages.
RunConfig parse_config(const std::string& text, const std::string& command, const std::string& source = "<config>");
RunConfig load_config(const std::optional<std::string>& path, const std::string& command);

// Rejects unknown keys and wrong types in a block against its defaults.
void validate_block(const Json& user, const Json& defaults, const std::string& path);

BetaFn beta_from_json(const Json& j, const std::string& path = "beta");
void validate_beta_json(const Json& j, const std::string& path);
ChainLink link_from_json(const Json& j, const std::string& path);
RateMode rate_mode_from_string(const std::string& s, const std::string& path);

}  // namespace wpi
