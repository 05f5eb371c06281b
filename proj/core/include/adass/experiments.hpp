#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "adass/adass.hpp"
#include "adass/config.hpp"
#include "adass/dataset.hpp"
#include "adass/model.hpp"

namespace adass {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitDiverged = 3,
};

/// A dataset paired with the model trained on it.
struct Task {
  std::string name;
  Dataset data;
  ModelSpec model;
};

/// Bundled tasks: "logistic-separable" (default demo) and "mlp-blobs".
/// Any other value is read as a CSV path. Recognized keys: n, d, hidden,
/// classes, margin, spread, l2, data_seed.
Task make_task(const std::string& dataset, const std::string& model, const Config& cfg);

/// Training settings for `task`: the tuned defaults of the bundled task,
/// overridden by any optimizer or selection keys in `cfg`.
AdassConfig training_config(const Config& cfg, const Task& task);

/// Initial parameters from `init_seed`, falling back to `seed`.
Vec initial_params(const Task& task, const Config& cfg);

/// Keys accepted by each subcommand, used to reject typos.
const std::set<std::string>& lsq_criteria_keys();
const std::set<std::string>& adass_train_keys();
const std::set<std::string>& probe_keys();

/// Each command writes its CSVs plus `resolved.cfg` into `out_dir` and
/// returns an ExitCode. Diagnostics go to `log`.
int cmd_lsq_criteria(const Config& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_adass_train(const Config& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_probe(const std::string& name, const Config& cfg, const std::filesystem::path& out_dir,
              std::ostream& log);

}  // namespace adass
