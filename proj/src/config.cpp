#include "wpi/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wpi {

namespace {

bool is_beta_key(const std::string& k) { return k == "beta" || k == "base" || k == "beta2"; }

std::string type_name(const Json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

double num_at(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  const Json& v = j.at(key);
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number, got " + type_name(v));
  return v.get<double>();
}

void only_keys(const Json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object, got " + type_name(j));
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(path + ": unknown key '" + it.key() + "'");
}

std::vector<double> num_array(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  const Json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path + "." + key + ": array entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json merge(const Json& defaults, const Json& user) {
  Json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string& k = it.key();
    if (out.contains(k) && out[k].is_object() && it->is_object() && !is_beta_key(k))
      out[k] = merge(out[k], *it);
    else
      out[k] = *it;
  }
  return out;
}

const Json kBetaPoly2 = {{"type", "polynomial"}, {"c0", 1.0}, {"c1", 2.0}};
const Json kBetaPoly1 = {{"type", "polynomial"}, {"c0", 1.0}, {"c1", 1.0}};

}  // namespace

RateMode rate_mode_from_string(const std::string& s, const std::string& path) {
  if (s == "auto") return RateMode::Auto;
  if (s == "fa") return RateMode::Fa;
  if (s == "finf") return RateMode::Finf;
  throw ConfigError(path + ": mode must be one of auto, fa, finf");
}

// "variant" is accepted in place of "type"
static Json beta_keys(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("variant")) return j;
  if (j.contains("type")) throw ConfigError(path + ": give either type or variant, not both");
  Json out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key() == "variant" ? "type" : it.key()] = it.value();
  return out;
}

void validate_beta_json(const Json& raw, const std::string& path) {
  if (!raw.is_object()) throw ConfigError(path + ": expected an object");
  const Json j = beta_keys(raw, path);
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError(path + ".type: missing or not a string");
  const std::string t = j["type"];
  if (t == "strong_pi") {
    only_keys(j, {"type", "a", "cp"}, path);
  } else if (t == "polynomial") {
    only_keys(j, {"type", "c0", "c1"}, path);
  } else if (t == "stretched_exp") {
    only_keys(j, {"type", "eta0", "eta1", "eta2"}, path);
  } else if (t == "lognormal") {
    only_keys(j, {"type", "sigma"}, path);
  } else if (t == "tabulated") {
    only_keys(j, {"type", "s", "beta", "tail_exponent", "interp"}, path);
  } else {
    throw ConfigError(path + ".type: unknown beta type '" + t +
                      "' (strong_pi, polynomial, stretched_exp, lognormal, tabulated)");
  }
  try {
    (void)beta_from_json(j, path);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

BetaFn beta_from_json(const Json& raw, const std::string& path) {
  const Json j = beta_keys(raw, path);
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError(path + ".type: missing or not a string");
  const std::string t = j.at("type");
  if (t == "strong_pi") return BetaFn::strong_pi(num_at(j, "a", path), num_at(j, "cp", path));
  if (t == "polynomial") return BetaFn::polynomial(num_at(j, "c0", path), num_at(j, "c1", path));
  if (t == "stretched_exp")
    return BetaFn::stretched_exp(num_at(j, "eta0", path), num_at(j, "eta1", path), num_at(j, "eta2", path));
  if (t == "lognormal") return BetaFn::lognormal_tail(num_at(j, "sigma", path));
  if (t == "tabulated") {
    std::optional<double> k;
    if (j.contains("tail_exponent") && !j["tail_exponent"].is_null()) k = num_at(j, "tail_exponent", path);
    Interpolation interp = Interpolation::LogLog;
    if (j.contains("interp")) {
      std::string m = j["interp"].is_string() ? j["interp"].get<std::string>() : "";
      if (m == "linear")
        interp = Interpolation::Linear;
      else if (m != "loglog")
        throw ConfigError(path + ".interp: expected loglog or linear");
    }
    return BetaFn::tabulated(num_array(j, "s", path), num_array(j, "beta", path), k, interp);
  }
  throw ConfigError(path + ".type: unknown beta type '" + t + "'");
}

ChainLink link_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw ConfigError(path + ": a link needs a string 'type'");
  const std::string t = j["type"];
  if (t == "strong") {
    only_keys(j, {"type", "cp"}, path);
    return StrongLink{num_at(j, "cp", path)};
  }
  if (t == "weak") {
    only_keys(j, {"type", "beta2"}, path);
    if (!j.contains("beta2")) throw ConfigError(path + ".beta2: missing");
    validate_beta_json(j["beta2"], path + ".beta2");
    return WeakLink{beta_from_json(j["beta2"], path + ".beta2")};
  }
  if (t == "gap") {
    only_keys(j, {"type", "c_gap"}, path);
    return GapLink{num_at(j, "c_gap", path)};
  }
  if (t == "lazy") {
    only_keys(j, {"type", "eps", "mass", "p"}, path);
    LazyLink l;
    l.eps = num_array(j, "eps", path);
    l.mass = num_array(j, "mass", path);
    if (j.contains("p")) l.p = num_at(j, "p", path);
    return l;
  }
  throw ConfigError(path + ".type: unknown link type '" + t + "' (strong, weak, gap, lazy)");
}

Json default_block(const std::string& command) {
  if (command == "rate")
    return {{"beta", kBetaPoly2}, {"a", 1.0},        {"mode", "auto"},        {"n_min", 1.0},
            {"n_max", 1e6},      {"n_points", 61}, {"rockner_wang", false}};
  if (command == "chain")
    return {{"base", kBetaPoly1},
            {"links", Json::array({Json{{"type", "weak"}, {"beta2", kBetaPoly1}}})},
            {"a", 1.0},
            {"s_min", 1e-3},
            {"s_max", 1e6},
            {"s_points", 91},
            {"n_min", 1.0},
            {"n_max", 1e6},
            {"n_points", 61}};
  if (command == "imh")
    return {{"family", "expexp"}, {"a1", 1.0},        {"a2", 2.0},       {"b1", 1.0},        {"b2", 2.0},
            {"s_max", 1e4},       {"s_points", 81},   {"n_max", 1e4},    {"n_points", 41},   {"simulate", true},
            {"replicas", 2000},   {"inner", 5},       {"sim_n_max", 100}, {"threshold", 1.0}};
  if (command == "pm")
    return {{"lognormal_rate", {{"sigmas", {0.5, 1.0, 2.0}}, {"cp", 1.0}, {"n_min", 1.0}, {"n_max", 1e6}, {"n_points", 61}}},
            {"mixing", {{"epsilons", {0.1, 0.01, 0.001}}, {"sigma", 1.0}, {"cp", 1.0}}},
            {"budget", {{"epsilons", {0.1, 0.01, 0.001}}, {"H_values", {1e2, 1e4, 1e6}}, {"cp", 1.0}, {"sigma0_sq", 1.0}}},
            {"avar_curve", {{"cp", 1.0}, {"sigma_min", 0.1}, {"sigma_max", 3.0}, {"points", 59}}},
            {"abc", {{"ell", {0.05, 0.2, 0.5}}, {"pi", {0.2, 0.3, 0.5}}, {"N_values", {1, 2, 4, 8, 16, 32}}, {"p", 1}}},
            {"product",
             {{"T_values", {1, 5, 10, 50, 100}},
              {"alpha", 1.0},
              {"p", 2},
              {"b", 1.0},
              {"k", 1.0},
              {"c", 1.0},
              {"l", 2.0},
              {"s_min", 1.0},
              {"s_max", 1e6},
              {"s_points", 31}}}};
  if (command == "verify")
    return {{"chains", 50},        {"d_min", 3},          {"d_max", 10},        {"n_max", 200},
            {"kinds", {"lazy", "square"}}, {"random_f", 20}, {"beta_scale", 1.0}, {"beta_points", 60},
            {"phi", "osc2"},       {"necessity", true},   {"necessity_c1", 2.0}, {"two_state_check", true}};
  throw ConfigError("unknown command '" + command + "'");
}

void validate_block(const Json& user, const Json& defaults, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path + ": expected an object, got " + type_name(user));
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string& k = it.key();
    const std::string p = path + "." + k;
    if (!defaults.contains(k)) throw ConfigError(p + ": unknown key");
    const Json& d = defaults.at(k);
    const Json& v = *it;
    if (is_beta_key(k)) {
      validate_beta_json(v, p);
    } else if (k == "links") {
      if (!v.is_array()) throw ConfigError(p + ": expected an array of links");
      for (std::size_t i = 0; i < v.size(); ++i) (void)link_from_json(v[i], p + "[" + std::to_string(i) + "]");
    } else if (d.is_object()) {
      validate_block(v, d, p);
    } else if (d.is_number()) {
      if (!v.is_number()) throw ConfigError(p + ": expected a number, got " + type_name(v));
      if (d.is_number_integer() && !(v.is_number_integer() || std::floor(v.get<double>()) == v.get<double>()))
        throw ConfigError(p + ": expected an integer");
    } else if (d.is_boolean()) {
      if (!v.is_boolean()) throw ConfigError(p + ": expected true or false, got " + type_name(v));
    } else if (d.is_string()) {
      if (!v.is_string()) throw ConfigError(p + ": expected a string, got " + type_name(v));
      if (k == "mode") (void)rate_mode_from_string(v, p);
    } else if (d.is_array()) {
      if (!v.is_array()) throw ConfigError(p + ": expected an array, got " + type_name(v));
      bool want_num = !d.empty() && d[0].is_number();
      for (const auto& e : v)
        if (want_num ? !e.is_number() : !e.is_string())
          throw ConfigError(p + ": array entries must be " + (want_num ? "numbers" : "strings"));
    }
  }
}

RunConfig parse_config(const std::string& text, const std::string& command, const std::string& source) {
  Json user;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    user = Json::object();
  } else {
    try {
      user = Json::parse(text);
    } catch (const Json::parse_error& e) {
      auto [line, col] = line_col(text, e.byte);
      std::ostringstream msg;
      msg << source << ":" << line << ":" << col << ": syntax error: " << e.what();
      throw ConfigError(msg.str());
    }
  }
  if (!user.is_object()) throw ConfigError(source + ": top level must be an object");
  static const std::set<std::string> commands{"rate", "chain", "imh", "pm", "verify"};
  if (!commands.count(command)) throw ConfigError("unknown command '" + command + "'");
  RunConfig rc;
  rc.command = command;
  Json resolved = Json::object();
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string& k = it.key();
    if (k == "seed") {
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
        throw ConfigError(source + ": seed: expected a nonnegative integer");
    } else if (k == "out" || k == "format") {
      if (!it->is_string()) throw ConfigError(source + ": " + k + ": expected a string");
    } else if (k == "threads") {
      if (!it->is_number_integer()) throw ConfigError(source + ": threads: expected an integer");
    } else if (commands.count(k)) {
      validate_block(*it, default_block(k), k);
    } else {
      throw ConfigError(source + ": unknown key '" + k + "'");
    }
  }
  if (user.contains("seed")) rc.seed = user["seed"].get<std::uint64_t>();
  if (user.contains("out")) rc.out = user["out"];
  if (user.contains("format")) rc.format = user["format"];
  if (user.contains("threads")) rc.threads = user["threads"];
  if (rc.format != "csv" && rc.format != "table") throw ConfigError(source + ": format must be csv or table");
  resolved["seed"] = rc.seed;
  resolved["out"] = rc.out;
  resolved["format"] = rc.format;
  resolved["threads"] = rc.threads;
  resolved[command] = merge(default_block(command), user.contains(command) ? user[command] : Json::object());
  rc.doc = resolved;
  return rc;
}

RunConfig load_config(const std::optional<std::string>& path, const std::string& command) {
  if (!path) return parse_config("", command, "<defaults>");
  std::ifstream in(*path);
  if (!in) throw ConfigError(*path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), command, *path);
}

}  // namespace wpi
