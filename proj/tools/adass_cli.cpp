// adass: run selection experiments and probes from a key=value config.
//
//   adass lsq-criteria [--config FILE] [--out DIR] [--seed N]
//   adass adass-train  [--config FILE] [--out DIR] [--seed N]
//   adass probe NAME   [--config FILE] [--out DIR] [--seed N]
//
// Exit codes: 0 ok, 1 check failed, 2 usage/config error, 3 diverged.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adass/config.hpp"
#include "adass/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "seed (overrides the config)");
}

adass::Config resolve(const CommonArgs& args) {
  adass::Config cfg = args.config.empty() ? adass::Config{} : adass::Config::load(args.config);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sample selection experiments"};
  app.require_subcommand(1);

  CommonArgs lsq_args, train_args, probe_args;
  std::string probe_name;
  auto* lsq = app.add_subcommand("lsq-criteria", "compare selection criteria on least squares");
  add_common(lsq, lsq_args);
  auto* train = app.add_subcommand("adass-train", "train with adaptive sample selection");
  add_common(train, train_args);
  auto* probe = app.add_subcommand("probe", "run a diagnostic probe");
  probe->add_option("name", probe_name, "negative-example | opsc | zeta | moreau | theorem1")->required();
  add_common(probe, probe_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? adass::kExitOk : adass::kExitUsage;
  }

  try {
    if (*lsq) return adass::cmd_lsq_criteria(resolve(lsq_args), lsq_args.out, std::cout);
    if (*train) return adass::cmd_adass_train(resolve(train_args), train_args.out, std::cout);
    return adass::cmd_probe(probe_name, resolve(probe_args), probe_args.out, std::cout);
  } catch (const adass::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return adass::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return adass::kExitCheckFailed;
  }
}
