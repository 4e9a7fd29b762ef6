#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "wpi/commands.hpp"
#include "wpi/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Convergence-rate bounds from weak and super-Poincare inequalities"};
  app.require_subcommand(1);

  std::string config_path, out, format;
  std::uint64_t seed = 0;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "global seed");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
    sub->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
  };
  auto* rate = app.add_subcommand("rate", "F^-1(n) over an n grid for one beta");
  auto* chain = app.add_subcommand("chain", "compose comparison links and report the rate");
  auto* imh = app.add_subcommand("imh", "independent Metropolis-Hastings beta, bound and simulated decay");
  auto* pm = app.add_subcommand("pm", "pseudo-marginal calculators");
  auto* verify = app.add_subcommand("verify", "finite-state battery and necessity round trip");
  for (auto* s : {rate, chain, imh, verify}) add_common(s);
  std::string pm_mode;
  pm->require_subcommand(1);
  for (const char* name : {"lognormal-rate", "mixing", "budget", "avar-curve", "abc", "product"}) {
    auto* s = pm->add_subcommand(name);
    add_common(s);
    s->callback([&pm_mode, name] { pm_mode = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::string command = app.get_subcommands().front()->get_name();
    std::optional<std::string> path;
    if (!config_path.empty()) path = config_path;
    wpi::RunConfig rc = wpi::load_config(path, command);
    rc.subcommand = pm_mode;
    auto* used = command == "pm" ? pm->get_subcommands().front() : app.get_subcommands().front();
    if (used->count("--out")) rc.out = out;
    if (used->count("--seed")) rc.seed = seed;
    if (used->count("--threads")) rc.threads = threads;
    if (used->count("--format")) rc.format = format;
    rc.doc["out"] = rc.out;
    rc.doc["seed"] = rc.seed;
    rc.doc["threads"] = rc.threads;
    rc.doc["format"] = rc.format;
    return wpi::run_command(rc, std::cout);
  } catch (const wpi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
