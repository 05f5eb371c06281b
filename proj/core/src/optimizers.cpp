#include "adass/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace adass {

std::string_view to_string(Method method) { return method == Method::Sgd ? "sgd" : "msgd"; }

Method parse_method(std::string_view name) {
  if (name == "sgd") return Method::Sgd;
  if (name == "msgd") return Method::Msgd;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected sgd, msgd)");
}

std::string_view to_string(Sampling sampling) {
  return sampling == Sampling::Permutation ? "permutation" : "uniform";
}

Sampling parse_sampling(std::string_view name) {
  if (name == "permutation") return Sampling::Permutation;
  if (name == "uniform" || name == "uniform-with-replacement") return Sampling::UniformWithReplacement;
  throw std::invalid_argument("unknown sampling '" + std::string(name) + "' (expected permutation, uniform)");
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("step size eta must be finite and > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("momentum beta must lie in [0, 1)");
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("step decay must lie in (0, 1]");
  if (batch < 1) throw std::invalid_argument("minibatch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

BallConstraint BallConstraint::unbounded(std::size_t dim) {
  return {Vec::Zero(static_cast<Eigen::Index>(dim)), kInfinity};
}

bool BallConstraint::contains(const Vec& w, double slack) const {
  return !bounded() || (w - center).norm() <= radius + slack;
}

Vec project_ball(const Vec& w, const BallConstraint& ball) {
  if (!ball.bounded()) return w;
  if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  const Vec offset = w - ball.center;
  const double dist = offset.norm();
  if (dist <= ball.radius) return w;
  return ball.center + (ball.radius / dist) * offset;
}

std::size_t steps_per_pass(std::size_t components, std::size_t batch) {
  return (components + batch - 1) / batch;
}

Vec inner_solve(const FiniteSumObjective& objective, const Vec& w_init, std::size_t iterations, double eta,
                const BallConstraint& ball, const OptimizerConfig& cfg, SgdState& state) {
  if (static_cast<std::size_t>(w_init.size()) != objective.dim()) {
    throw std::invalid_argument("inner_solve: start point dimension mismatch");
  }
  Vec w = project_ball(w_init, ball);
  const std::size_t m = objective.size();
  if (iterations == 0 || m == 0) return w;

  const bool full = cfg.batch >= m;
  const bool momentum = cfg.method == Method::Msgd;
  if (momentum && state.velocity.size() != w.size()) state.velocity = Vec::Zero(w.size());

  IndexList order = iota_indices(m);
  std::size_t cursor = m;
  IndexList draws(full ? 0 : cfg.batch);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  Vec grad(w.size());

  for (std::size_t k = 0; k < iterations; ++k) {
    std::span<const std::size_t> batch;
    if (full) {
      batch = order;
    } else if (cfg.sampling == Sampling::Permutation) {
      if (cursor >= m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), state.rng);
        cursor = 0;
      }
      const std::size_t count = std::min(cfg.batch, m - cursor);
      batch = std::span<const std::size_t>(order).subspan(cursor, count);
      cursor += count;
    } else {
      for (auto& d : draws) d = pick(state.rng);
      batch = draws;
    }

    const double value = objective.batch_gradient(w, batch, grad);
    state.gradient_evals += batch.size();
    if (!std::isfinite(value) || !grad.allFinite()) {
      throw DivergenceError("non-finite objective in inner solver at step " + std::to_string(k), 0);
    }
    if (momentum) {
      state.velocity = cfg.beta * state.velocity + grad;
      w -= eta * state.velocity;
    } else {
      w -= eta * grad;
    }
    if (ball.bounded()) w = project_ball(w, ball);
  }
  return w;
}

TrainTrace epoch_sgd(const ModelSpec& model, const Dataset& data, const Vec& w_init, const OptimizerConfig& cfg,
                     std::size_t threads) {
  cfg.validate();
  const DatasetObjective objective(model, data);
  const BallConstraint ball = BallConstraint::unbounded(model.param_count());
  SgdState state(cfg.seed);

  TrainTrace trace;
  trace.initial_loss = full_loss(model, w_init, data, threads);
  trace.records.reserve(cfg.epochs);
  const auto start = std::chrono::steady_clock::now();

  Vec w = w_init;
  double eta = cfg.eta;
  const std::size_t steps = steps_per_pass(data.size(), cfg.batch);
  for (std::size_t t = 0; t < cfg.epochs; ++t) {
    try {
      w = inner_solve(objective, w, steps, eta, ball, cfg, state);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (epoch " + std::to_string(t + 1) + ")", t + 1);
    }
    const double loss = full_loss(model, w, data, threads);
    if (!std::isfinite(loss)) {
      throw DivergenceError("training loss became non-finite at epoch " + std::to_string(t + 1), t + 1);
    }
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    trace.records.push_back({t + 1, loss, eta, state.gradient_evals, elapsed.count()});
    trace.iterates.push_back(w);
    eta *= cfg.decay;
  }
  trace.final_params = w;
  return trace;
}

ReferenceSolveResult reference_minimize(const FiniteSumObjective& objective, const Vec& w_init,
                                        const BallConstraint& ball, std::size_t max_iters, double tol) {
  Vec w = project_ball(w_init, ball);
  const double scale = 1.0 / static_cast<double>(objective.size());
  double value = objective.total(w) * scale;
  double step = 1.0;
  double mapping = kInfinity;
  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    const Vec grad = objective.total_gradient(w) * scale;
    Vec next;
    double next_value = 0.0;
    Vec move;
    while (true) {
      next = project_ball(w - step * grad, ball);
      next_value = objective.total(next) * scale;
      move = next - w;
      const double model_value = value + grad.dot(move) + move.squaredNorm() / (2.0 * step);
      if (next_value <= model_value + 1e-15 * std::abs(value) || step < 1e-20) break;
      step *= 0.5;
    }
    mapping = move.norm() / step;
    if (!std::isfinite(next_value)) throw DivergenceError("reference solver hit a non-finite value", 0);
    w = std::move(next);
    value = next_value;
    if (mapping <= tol) break;
    step *= 2.0;
  }
  return {w, value, mapping, it};
}

namespace {

double max_sample_gradient_norm(const ModelSpec& model, const Dataset& data, const Vec& w) {
  double best = 0.0;
  Vec grad(w.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    grad.setZero();
    accumulate_sample(model, w, data, i, grad);
    best = std::max(best, grad.norm());
  }
  return best;
}

}  // namespace

Lemma1Result lemma1_bound_check(const ModelSpec& model, const Dataset& data, const Lemma1Config& cfg) {
  model.check_compatible(data);
  if (!model.is_convex()) throw std::invalid_argument("averaged-SGD bound check needs a convex model (least-squares, logistic)");
  if (!(cfg.eta > 0.0) || cfg.steps < 1 || cfg.batch < 1) {
    throw std::invalid_argument("averaged-SGD bound check needs eta > 0, T >= 1, batch >= 1");
  }
  const DatasetObjective objective(model, data);
  const Vec w0 = project_ball(cfg.w0, cfg.domain);
  const ReferenceSolveResult ref = reference_minimize(objective, w0, cfg.domain, 200000, 1e-12);

  double g_max = std::max(max_sample_gradient_norm(model, data, w0),
                          max_sample_gradient_norm(model, data, ref.minimizer));

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = data.size();
  const bool full = cfg.batch >= n;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  IndexList all = iota_indices(n);
  IndexList draws(full ? 0 : cfg.batch);
  Vec grad(w0.size());
  Vec w = w0;
  Vec sum = Vec::Zero(w0.size());
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    sum += w;
    std::span<const std::size_t> batch = all;
    if (!full) {
      for (auto& d : draws) d = pick(rng);
      batch = draws;
    }
    objective.batch_gradient(w, batch, grad);
    g_max = std::max(g_max, grad.norm());
    w = project_ball(w - cfg.eta * grad, cfg.domain);
  }

  Lemma1Result out;
  out.averaged = sum / static_cast<double>(cfg.steps);
  out.reference = ref.minimizer;
  out.reference_value = ref.value;
  out.gradient_bound = g_max;
  out.gap = objective.mean(out.averaged) - ref.value;
  out.bound = (w0 - ref.minimizer).squaredNorm() / (2.0 * static_cast<double>(cfg.steps) * cfg.eta) +
              g_max * g_max * cfg.eta / 2.0;
  return out;
}

ConvergenceBoundEstimate fit_convergence_bound(const ModelSpec& model, const Dataset& data,
                                               const OptimizerConfig& cfg, std::size_t restarts,
                                               double max_distance) {
  cfg.validate();
  if (restarts < 2) throw std::invalid_argument("fit_convergence_bound needs at least two restarts");
  const DatasetObjective objective(model, data);
  const BallConstraint free = BallConstraint::unbounded(model.param_count());
  const ReferenceSolveResult ref = reference_minimize(objective, init_params(model, cfg.seed), free, 200000, 1e-12);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xs;
  std::vector<double> ys;
  double g_max = max_sample_gradient_norm(model, data, ref.minimizer);
  for (std::size_t r = 1; r <= restarts; ++r) {
    Vec dir(ref.minimizer.size());
    for (Eigen::Index j = 0; j < dir.size(); ++j) dir[j] = normal(rng);
    dir.normalize();
    const double dist = max_distance * static_cast<double>(r) / static_cast<double>(restarts);
    const Vec w0 = ref.minimizer + dist * dir;
    g_max = std::max(g_max, max_sample_gradient_norm(model, data, w0));

    OptimizerConfig run = cfg;
    run.decay = 1.0;
    run.seed = cfg.seed + r;
    const TrainTrace trace = epoch_sgd(model, data, w0, run);
    xs.push_back(dist * dist);
    ys.push_back(trace.records.back().full_loss - ref.value);
  }

  const auto k = static_cast<double>(xs.size());
  const double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
  const double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  ConvergenceBoundEstimate est;
  est.restarts = restarts;
  est.gradient_bound = g_max;
  const double det = k * sxx - sx * sx;
  est.theta1 = det != 0.0 ? (k * sxy - sx * sy) / det : 0.0;
  est.theta2 = (sy - est.theta1 * sx) / k;
  if (est.theta2 < 0.0) {
    est.theta2 = 0.0;
    est.theta1 = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  if (est.theta1 < 0.0) {
    est.theta1 = 0.0;
    est.theta2 = std::max(0.0, sy / k);
  }
  return est;
}

}  // namespace adass
