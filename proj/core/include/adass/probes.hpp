#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adass/model.hpp"
#include "adass/objective.hpp"
#include "adass/optimizers.hpp"

namespace adass::probes {

/// Budget for the inner minimizations behind every probe. Minimizers are
/// estimates; each report carries the solver gap it was obtained with.
struct SolverSettings {
  std::size_t iterations = 2000;
  double eta = 0.1;
  double beta = 0.9;
  std::size_t batch = 0;  ///< 0: full gradient
  std::size_t restarts = 3;
  double restart_scale = 0.1;  ///< restarts 2.. start at w + U(ball of this radius)
  std::uint64_t seed = 7;
};

struct MinimizeResult {
  Vec minimizer;
  double value = 0.0;       ///< objective total at the minimizer
  double solver_gap = 0.0;  ///< projected gradient-mapping norm at the minimizer
};

/// Best-of-restarts minimization of objective.total() over the ball, with
/// the ball center's value as a floor candidate when `keep_start` is set.
MinimizeResult minimize_over_ball(const FiniteSumObjective& objective, const Vec& start,
                                  const BallConstraint& ball, const SolverSettings& settings,
                                  bool keep_start = false);

struct MoreauResult {
  double value = 0.0;  ///< M_{gamma,r}(w; phi)
  Vec prox_point;
  Vec gradient;  ///< (w - prox_point) / gamma
  double solver_gap = 0.0;
};

/// M_{gamma,r}(w; phi) = min_{w' in B(w,r)} phi(w') + ||w' - w||^2 / (2 gamma),
/// phi taken as objective.total(). M <= phi(w) always holds because w itself
/// is kept as a candidate.
MoreauResult moreau_eval(const FiniteSumObjective& phi, const Vec& w, double gamma, double radius,
                         const SolverSettings& settings);

struct InsignificanceReport {
  bool measurable = false;
  double zeta = 0.0;
  double numerator = 0.0;    ///< |phi2(w*) - phi2(w)|
  double denominator = 0.0;  ///< phi1(w) - phi1(w*)
  Vec minimizer;             ///< w* of phi1 over the domain
  double solver_gap = 0.0;
  double tolerance = 0.0;    ///< smallest denominator accepted
};

/// Smallest zeta such that phi2 is zeta-insignificant at w w.r.t.
/// (phi1, domain), with the phi1 minimizer estimated numerically.
InsignificanceReport zeta_insignificance(const FiniteSumObjective& phi1, const FiniteSumObjective& phi2,
                                         const Vec& w, const BallConstraint& domain,
                                         const SolverSettings& settings, double min_denominator = 1e-12);

/// Same ratio with a known minimizer of phi1.
InsignificanceReport zeta_ratio(const FiniteSumObjective& phi1, const FiniteSumObjective& phi2, const Vec& w,
                                const Vec& phi1_minimizer, double min_denominator = 1e-12);

struct PropertyReport {
  double property1_margin = 0.0;        ///< h(w) - (1-zeta) Delta(phi) - h(w*_phi)
  double property2_lower_margin = 0.0;  ///< Delta(h) - (1-zeta) Delta(phi)
  double property2_upper_margin = 0.0;  ///< (1+zeta) Delta(phi) - Delta(h), informational
  double tolerance = 0.0;
  bool property1_holds = false;
  bool property2_holds = false;  ///< lower inequality
};

/// Checks the two consequences of zeta-insignificance for h = phi + psi at
/// w over the domain. Requires zeta < 1.
PropertyReport property_checks(const FiniteSumObjective& phi, const FiniteSumObjective& psi, const Vec& w,
                               const BallConstraint& domain, double zeta, const SolverSettings& settings,
                               double tolerance = 1e-6);

/// zeta = 2 sum_{i in S^c} L_i / (mu |S| ||w0 - w*_{h_S}||).
double theorem3_zeta(const std::vector<double>& complement_lipschitz, double mu, std::size_t subset_size,
                     double distance);

/// h_i(w) = (mu_i / 2) ||w - c_i||^2: exact subset minimizers over a ball
/// and exact local Lipschitz constants.
class QuadraticEnsemble {
 public:
  QuadraticEnsemble(std::vector<Vec> centers, std::vector<double> curvatures);

  static QuadraticEnsemble random(std::size_t count, std::size_t dim, double mu_min, double mu_max,
                                  double center_scale, std::uint64_t seed);

  std::size_t size() const { return centers_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(centers_.front().size()); }
  double strong_convexity() const;  ///< min_i mu_i

  double value(const IndexList& subset, const Vec& w) const;
  /// argmin of h_S over B(center, radius), closed form.
  Vec minimizer(const IndexList& subset, const Vec& center, double radius) const;
  /// Smallest L with |h_i(w') - h_i(w0)| <= L ||w' - w0|| on B(w0, r):
  /// mu_i (||w0 - c_i|| + r / 2).
  double local_lipschitz(std::size_t i, const Vec& w0, double radius) const;

  /// h_S(w0) - min h_S - (mu |S| / 2) ||w0 - w*||^2
  double opsc_margin(const IndexList& subset, const Vec& w0, double radius) const;

  struct Theorem3Check {
    double formula = 0.0;
    double measured = 0.0;  ///< insignificance ratio of h_{S^c} w.r.t. (h_S, ball)
    double distance = 0.0;
    bool formula_below_one() const { return formula < 1.0; }
  };
  Theorem3Check theorem3_check(const IndexList& subset, const Vec& w0, double radius) const;

 private:
  std::vector<Vec> centers_;
  std::vector<double> curvatures_;
};

struct OpscSettings {
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t repeats = 10;
  double radius = 1.0;
  SolverSettings solver{.iterations = 500, .eta = 0.05, .beta = 0.9, .batch = 10, .restarts = 1};
  std::uint64_t seed = 11;
};

struct OpscRow {
  double fraction = 0.0;
  std::size_t subset_size = 0;
  double mean_drop = 0.0;
  double std_drop = 0.0;
  double mean_distance = 0.0;  ///< ||w0 - w*_{h_S}||, measured
  std::size_t repeats = 0;
  std::size_t failures = 0;
};

struct OpscResult {
  std::vector<OpscRow> rows;
  std::vector<std::pair<std::size_t, double>> points;  ///< (|S|, drop) per repeat
  double slope = 0.0;      ///< kappa in drop ~ kappa |S|
  double r_squared = 0.0;
};

/// For each fraction draws random subsets S and measures
/// h_S(w0) - min_{B(w0,r)} h_S with momentum SGD, h_S = sum_{i in S} f_i.
OpscResult opsc_probe(const ModelSpec& model, const Dataset& data, const Vec& w0, const OpscSettings& settings);

/// Least-squares fit through the origin y ~ k x and its R^2 (centered).
std::pair<double, double> fit_proportional(const std::vector<std::pair<std::size_t, double>>& points);

/// A set of affine losses f_i(w) = slope_i w + intercept_i on [lo, hi].
struct IntervalInstance {
  std::vector<double> slopes;
  std::vector<double> intercepts;
  double lo = 0.0;
  double hi = 1.0;

  /// The two-sample instance f_1 = 1.5 w, f_2 = -w + 2 on [0, 1].
  static IntervalInstance counter_example();

  std::vector<double> losses(double w) const;
  /// argmin over [lo, hi] of sum_{i in S} f_i, lo on ties.
  double minimize(const IndexList& subset) const;
};

struct SequenceResult {
  std::vector<double> iterates;  ///< w_1, w_2, ...
  bool converged = false;
  std::size_t cycle_period = 0;  ///< 0: no cycle found
  std::string verdict;
};

/// Max-loss selection with m = 1: pick the largest f_i(w_t), minimize it exactly.
SequenceResult max_loss_selection_run(const IntervalInstance& inst, double w0, std::size_t iterations);

/// Delta-loss selection (all samples at t = 0, then the Delta rule against
/// the previous iterate) with exact minimization over the interval.
SequenceResult delta_selection_run(const IntervalInstance& inst, double w0, double alpha, std::size_t iterations);

struct NoiseProbe {
  std::size_t max_loss_pick = 0;
  std::size_t max_loss_pick_noisy = 0;
  IndexList delta_order;
  IndexList delta_order_noisy;
};

/// Which sample each criterion prefers at w, with and without a constant
/// per-sample offset eps on the losses. Delta compares w to w_prev.
NoiseProbe loss_noise_probe(const IntervalInstance& inst, double w_prev, double w, const std::vector<double>& eps);

}  // namespace adass::probes
