#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "adass/model.hpp"
#include "adass/objective.hpp"

namespace adass {

enum class Method { Sgd, Msgd };
enum class Sampling { Permutation, UniformWithReplacement };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::string_view to_string(Sampling sampling);
Sampling parse_sampling(std::string_view name);

struct OptimizerConfig {
  Method method = Method::Msgd;
  double eta = 0.1;
  double beta = 0.9;   ///< heavy-ball momentum, msgd only
  double decay = 1.0;  ///< eta_{t+1} = decay * eta_t
  std::size_t batch = 1;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  Sampling sampling = Sampling::Permutation;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// B(center, radius). radius = +inf means unconstrained.
struct BallConstraint {
  Vec center;
  double radius = kInfinity;

  static BallConstraint unbounded(std::size_t dim);
  bool bounded() const { return radius < kInfinity; }
  bool contains(const Vec& w, double slack = 0.0) const;
};

/// Euclidean projection onto the ball.
Vec project_ball(const Vec& w, const BallConstraint& ball);

/// Raised when a loss or iterate stops being finite. epoch() is 1-based,
/// 0 when the failure happened outside an epoch loop.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Mutable optimizer state carried across calls: RNG stream, momentum
/// buffer and the number of component gradients evaluated so far.
struct SgdState {
  explicit SgdState(std::uint64_t seed) : rng(seed) {}

  std::mt19937_64 rng;
  Vec velocity;
  std::size_t gradient_evals = 0;
};

/// K (minibatch) gradient steps on `objective` starting at w_init, projecting
/// onto `ball` after every update. A minibatch at least as large as the
/// objective becomes a deterministic full-gradient step. With permutation
/// sampling each sweep over the components is a fresh shuffle and the last
/// batch of a sweep may be short.
///
/// The momentum buffer in `state` persists across calls.
Vec inner_solve(const FiniteSumObjective& objective, const Vec& w_init, std::size_t iterations, double eta,
                const BallConstraint& ball, const OptimizerConfig& cfg, SgdState& state);

/// ceil(m / b)
std::size_t steps_per_pass(std::size_t components, std::size_t batch);

struct EpochRecord {
  std::size_t epoch = 0;
  double full_loss = 0.0;
  double eta = 0.0;
  std::size_t samples_visited = 0;
  double wall_ms = 0.0;
};

struct TrainTrace {
  double initial_loss = 0.0;
  std::vector<EpochRecord> records;
  std::vector<Vec> iterates;  ///< w_{t+1} after each epoch
  Vec final_params;
};

/// Epoch SGD with optional heavy-ball momentum: per epoch one pass of
/// ceil(n/b) minibatch updates, w_{t+1} = last iterate, eta *= decay.
/// Throws DivergenceError with the epoch on a non-finite loss.
TrainTrace epoch_sgd(const ModelSpec& model, const Dataset& data, const Vec& w_init, const OptimizerConfig& cfg,
                     std::size_t threads = 1);

/// Deterministic projected gradient descent with backtracking; used as the
/// reference minimizer for convex problems.
struct ReferenceSolveResult {
  Vec minimizer;
  double value = 0.0;  ///< objective.mean() at the minimizer
  double gradient_mapping_norm = 0.0;
  std::size_t iterations = 0;
};
ReferenceSolveResult reference_minimize(const FiniteSumObjective& objective, const Vec& w_init,
                                        const BallConstraint& ball, std::size_t max_iters = 20000,
                                        double tol = 1e-10);

struct Lemma1Config {
  Vec w0;               ///< start point, projected onto the domain
  BallConstraint domain;
  double eta = 0.01;
  std::size_t steps = 100;  ///< T
  std::size_t batch = 1;    ///< batch >= n gives exact gradients
  std::uint64_t seed = 1;
};

struct Lemma1Result {
  double gap = 0.0;    ///< phi(w_bar_T) - phi(w_ref)
  double bound = 0.0;  ///< ||w0 - w_ref||^2 / (2 T eta) + G^2 eta / 2
  double gradient_bound = 0.0;  ///< G
  double reference_value = 0.0;
  Vec reference;
  Vec averaged;
  bool holds() const { return gap <= bound; }
};

/// Projected SGD with constant step on phi = F (mean loss), averaged iterate
/// over w_0..w_{T-1}, compared against the averaged-SGD bound. G is the max
/// per-sample gradient norm seen at w0, at w_ref and along the run.
/// Rejects non-convex model kinds.
Lemma1Result lemma1_bound_check(const ModelSpec& model, const Dataset& data, const Lemma1Config& cfg);

/// Empirical fit of E[phi(w_+) - phi(w)] <= theta1 ||w_0 - w||^2 + theta2.
struct ConvergenceBoundEstimate {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double gradient_bound = 0.0;
  std::size_t restarts = 0;
};

/// Runs `cfg` with constant step for cfg.epochs epochs from `restarts`
/// starting points at increasing distance from the reference minimizer and
/// fits gap ~ theta1 * dist^2 + theta2 with non-negative coefficients.
ConvergenceBoundEstimate fit_convergence_bound(const ModelSpec& model, const Dataset& data,
                                               const OptimizerConfig& cfg, std::size_t restarts,
                                               double max_distance);

}  // namespace adass
