#include "adass/adass.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "adass/probes.hpp"
#include "adass/selection.hpp"

namespace adass {

void AdassConfig::validate() const {
  optimizer.validate();
  if (!(alpha_sel > 0.0 && alpha_sel <= 1.0)) throw std::invalid_argument("alpha_sel must lie in (0, 1]");
  if (period < 1) throw std::invalid_argument("selection period p must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("proximal weight gamma must be > 0 (inf disables it)");
  if (!(radius > 0.0)) throw std::invalid_argument("trust radius r must be > 0 (inf disables it)");
  if (passes < 1) throw std::invalid_argument("passes per epoch must be >= 1");
}

namespace {

using Clock = std::chrono::steady_clock;

IndexList complement_of(const IndexList& sorted_subset, std::size_t n) {
  IndexList out;
  out.reserve(n - sorted_subset.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < sorted_subset.size() && sorted_subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

struct ZetaPair {
  std::optional<double> zeta1;
  std::optional<double> zeta2;
};

ZetaPair probe_zeta(const ModelSpec& model, const Dataset& data, const IndexList& subset,
                    const FiniteSumObjective& selected, const Vec& w_t, const Vec& w_next, double eta,
                    const AdassConfig& cfg, std::size_t epoch) {
  const DatasetObjective rest_base(model, data, complement_of(subset, data.size()));
  const ProximalObjective rest(rest_base, w_t, cfg.gamma);
  const BallConstraint ball{w_t, cfg.radius};

  probes::SolverSettings solver;
  const std::size_t batch = cfg.optimizer.batch;
  solver.iterations = cfg.zeta.iterations > 0 ? cfg.zeta.iterations : 50 * steps_per_pass(subset.size(), batch);
  solver.eta = cfg.zeta.eta > 0.0 ? cfg.zeta.eta : eta;
  solver.beta = cfg.optimizer.method == Method::Msgd ? cfg.optimizer.beta : 0.0;
  solver.batch = batch;
  solver.restarts = cfg.zeta.restarts;
  solver.restart_scale = cfg.zeta.restart_scale;
  solver.seed = cfg.optimizer.seed * 1000003ULL + epoch;

  ZetaPair out;
  const probes::InsignificanceReport at_start = probes::zeta_insignificance(selected, rest, w_t, ball, solver);
  if (at_start.measurable) out.zeta1 = at_start.zeta;
  const probes::InsignificanceReport at_next = probes::zeta_ratio(selected, rest, w_next, at_start.minimizer);
  if (at_next.measurable) out.zeta2 = at_next.zeta;
  return out;
}

}  // namespace

AdassTrace adass_train(const ModelSpec& model, const Dataset& data, const Vec& w_init, const AdassConfig& cfg) {
  cfg.validate();
  model.check_compatible(data);
  if (static_cast<std::size_t>(w_init.size()) != model.param_count()) {
    throw std::invalid_argument("initial parameters do not match the model");
  }

  const std::size_t n = data.size();
  const OptimizerConfig& opt = cfg.optimizer;
  const bool selecting = cfg.alpha_sel < 1.0;
  SgdState state(opt.seed);

  AdassTrace trace;
  trace.records.reserve(opt.epochs);
  const auto start = Clock::now();
  Clock::duration probe_time{};

  Vec w = w_init;
  double eta = opt.eta;
  // f_i(w_t); refreshed after every epoch for the full-loss column and reused
  // by the selection rule at refresh epochs.
  Vec losses = loss_sweep(model, w, data, cfg.threads);
  trace.initial_loss = losses.sum() / static_cast<double>(n);

  Vec cached;
  std::size_t refresh_samples = 0;
  if (selecting) {
    cached = losses;
    refresh_samples += n;
  }
  IndexList subset = iota_indices(n);
  double ratio_sum = 0.0;

  for (std::size_t t = 0; t < opt.epochs; ++t) {
    bool refreshed = selecting && t == 0;
    if (selecting && t > 0 && t % cfg.period == 0) {
      subset = select_subset(losses, cached, cfg.alpha_sel);
      cached = losses;
      refresh_samples += n;
      refreshed = true;
    }

    const DatasetObjective selected_base(model, data, subset);
    const ProximalObjective selected(selected_base, w, cfg.gamma);
    const BallConstraint ball{w, cfg.radius};
    const std::size_t steps = cfg.passes * steps_per_pass(subset.size(), opt.batch);

    Vec w_next;
    try {
      w_next = inner_solve(selected, w, steps, eta, ball, opt, state);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (epoch " + std::to_string(t + 1) + ")", t + 1);
    }

    AdassRecord rec;
    if (cfg.zeta.every > 0 && t % cfg.zeta.every == 0) {
      const auto probe_start = Clock::now();
      const ZetaPair z = probe_zeta(model, data, subset, selected, w, w_next, eta, cfg, t);
      rec.zeta1 = z.zeta1;
      rec.zeta2 = z.zeta2;
      probe_time += Clock::now() - probe_start;
    }

    losses = loss_sweep(model, w_next, data, cfg.threads);
    double total = 0.0;
    for (Eigen::Index i = 0; i < losses.size(); ++i) total += losses[i];
    double subset_total = 0.0;
    for (std::size_t i : subset) subset_total += losses[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(total)) {
      throw DivergenceError("training loss became non-finite at epoch " + std::to_string(t + 1), t + 1);
    }

    rec.epoch = t + 1;
    rec.full_loss = total / static_cast<double>(n);
    rec.subset_loss = subset_total / static_cast<double>(subset.size());
    rec.subset_size = subset.size();
    rec.ratio = static_cast<double>(subset.size()) / static_cast<double>(n);
    ratio_sum += rec.ratio;
    rec.rho_partial = ratio_sum / static_cast<double>(t + 1);
    rec.eta = eta;
    rec.refreshed = refreshed;
    rec.gradient_samples = state.gradient_evals;
    rec.refresh_samples = refresh_samples;
    rec.samples_visited = state.gradient_evals + refresh_samples;
    const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start - probe_time;
    rec.wall_ms = elapsed.count();
    trace.records.push_back(rec);
    if (cfg.record_iterates) {
      trace.iterates.push_back(w_next);
      trace.subsets.push_back(subset);
    }

    w = std::move(w_next);
    eta *= opt.decay;
  }
  trace.final_params = w;
  return trace;
}

RhoResult rho_T(const AdassTrace& trace, const std::vector<double>& zeta2) {
  RhoResult out;
  out.zeta_measured = !zeta2.empty();
  if (trace.records.empty()) return out;
  double sum = 0.0;
  for (std::size_t t = 0; t < trace.records.size(); ++t) {
    double zeta = t < zeta2.size() ? zeta2[t] : 0.0;
    if (!std::isfinite(zeta)) zeta = 0.0;
    sum += (1.0 + zeta) * trace.records[t].ratio;
  }
  out.value = sum / static_cast<double>(trace.records.size());
  return out;
}

std::vector<double> measured_zeta2(const AdassTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& rec : trace.records) out.push_back(rec.zeta2.value_or(std::nan("")));
  return out;
}

AdassTrace as_adass_trace(const TrainTrace& trace) {
  AdassTrace out;
  out.initial_loss = trace.initial_loss;
  std::size_t previous = 0;
  for (const auto& r : trace.records) {
    AdassRecord rec;
    rec.epoch = r.epoch;
    rec.full_loss = r.full_loss;
    rec.subset_loss = r.full_loss;
    rec.ratio = 1.0;
    rec.subset_size = r.samples_visited - previous;
    rec.rho_partial = 1.0;
    rec.eta = r.eta;
    rec.gradient_samples = r.samples_visited;
    rec.samples_visited = r.samples_visited;
    rec.wall_ms = r.wall_ms;
    previous = r.samples_visited;
    out.records.push_back(rec);
  }
  out.iterates = trace.iterates;
  out.final_params = trace.final_params;
  return out;
}

}  // namespace adass
