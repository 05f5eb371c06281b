#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adass/model.hpp"
#include "adass/optimizers.hpp"

namespace adass {

/// Settings for measuring zeta-insignificance on selected epochs.
struct ZetaProbeSettings {
  std::size_t every = 0;         ///< probe epochs t with t % every == 0; 0 disables
  std::size_t iterations = 0;    ///< inner-solver steps; 0 means 50 passes over S_t
  std::size_t restarts = 3;
  double restart_scale = 0.01;   ///< perturbation radius for restarts 2..
  double eta = 0.0;              ///< 0 reuses the epoch step
};

struct AdassConfig {
  OptimizerConfig optimizer;
  double alpha_sel = 1.0;  ///< selection fraction in (0, 1]
  std::size_t period = 5;  ///< p
  double gamma = kInfinity;
  double radius = kInfinity;
  std::size_t passes = 1;  ///< K_t = passes * ceil(|S_t| / b)
  ZetaProbeSettings zeta;
  std::size_t threads = 1;
  bool record_iterates = false;

  void validate() const;
};

struct AdassRecord {
  std::size_t epoch = 0;  ///< 1-based
  double full_loss = 0.0;
  double subset_loss = 0.0;  ///< f_{S_t}(w_{t+1})
  double ratio = 1.0;        ///< |S_t| / n
  std::size_t subset_size = 0;
  std::optional<double> zeta1;  ///< at w_t
  std::optional<double> zeta2;  ///< at w_{t+1}
  double rho_partial = 1.0;     ///< running mean of |S_t|/n (zeta = 0 variant)
  double eta = 0.0;
  bool refreshed = false;
  std::size_t gradient_samples = 0;  ///< cumulative component gradients
  std::size_t refresh_samples = 0;   ///< cumulative loss-only evaluations
  std::size_t samples_visited = 0;   ///< gradient_samples + refresh_samples
  double wall_ms = 0.0;
};

struct AdassTrace {
  double initial_loss = 0.0;
  std::vector<AdassRecord> records;
  std::vector<Vec> iterates;  ///< w_{t+1}, when record_iterates is set
  std::vector<IndexList> subsets;  ///< S_t per epoch, when record_iterates is set
  Vec final_params;

  double final_ratio() const { return records.empty() ? 1.0 : records.back().ratio; }
  std::size_t samples_visited() const { return records.empty() ? 0 : records.back().samples_visited; }
};

/// Adaptive sample selection around SGD / momentum SGD.
///
/// S_0 = [n] and losses are cached at w_0. At epochs t = p, 2p, ... a loss
/// sweep refreshes S_t by the Delta-loss rule against the cached losses,
/// otherwise S_t = S_{t-1}. Each epoch minimizes
///   |S_t| (f_{S_t}(w) + ||w - w_t||^2 / (2 gamma))
/// with inner_solve over B(w_t, r) for K_t steps, then eta *= decay.
/// alpha_sel = 1 never needs the sweep, so none is performed or counted.
///
/// Throws DivergenceError carrying the epoch.
AdassTrace adass_train(const ModelSpec& model, const Dataset& data, const Vec& w_init, const AdassConfig& cfg);

struct RhoResult {
  double value = 1.0;
  bool zeta_measured = false;  ///< false: zeta == 0 variant (mean sampling ratio)
};

/// rho_T = (1/T) sum_t (1 + zeta_{2,t}) |S_t| / n. Missing zeta entries count as 0.
RhoResult rho_T(const AdassTrace& trace, const std::vector<double>& zeta2 = {});

/// zeta2 column of a trace where measured.
std::vector<double> measured_zeta2(const AdassTrace& trace);

/// Converts an optimizer-only run into ADASS trace rows (ratio 1, no zeta).
AdassTrace as_adass_trace(const TrainTrace& trace);

}  // namespace adass
