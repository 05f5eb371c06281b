#include "adass/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "adass/selection.hpp"

namespace adass::probes {

namespace {

OptimizerConfig solver_config(const SolverSettings& s) {
  OptimizerConfig cfg;
  cfg.method = s.beta > 0.0 ? Method::Msgd : Method::Sgd;
  cfg.beta = s.beta;
  cfg.eta = s.eta;
  cfg.batch = s.batch == 0 ? std::numeric_limits<std::size_t>::max() : s.batch;
  cfg.sampling = Sampling::Permutation;
  return cfg;
}

Vec random_offset(std::mt19937_64& rng, Eigen::Index dim, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec dir(dim);
  for (Eigen::Index j = 0; j < dim; ++j) dir[j] = normal(rng);
  const double norm = dir.norm();
  if (norm == 0.0) return Vec::Zero(dim);
  return dir * (scale * std::pow(unit(rng), 1.0 / static_cast<double>(dim)) / norm);
}

double gradient_mapping(const FiniteSumObjective& objective, const Vec& w, const BallConstraint& ball, double eta) {
  const Vec grad = objective.total_gradient(w) / static_cast<double>(std::max<std::size_t>(objective.size(), 1));
  return (w - project_ball(w - eta * grad, ball)).norm() / eta;
}

}  // namespace

MinimizeResult minimize_over_ball(const FiniteSumObjective& objective, const Vec& start, const BallConstraint& ball,
                                  const SolverSettings& settings, bool keep_start) {
  if (!(settings.eta > 0.0)) throw std::invalid_argument("probe solver step must be > 0");
  const OptimizerConfig cfg = solver_config(settings);
  const Vec origin = project_ball(start, ball);

  MinimizeResult best{origin, kInfinity, 0.0};
  if (objective.size() == 0) {
    best.value = 0.0;
    return best;
  }
  std::mt19937_64 rng(settings.seed);
  const std::size_t restarts = std::max<std::size_t>(settings.restarts, 1);
  std::size_t failures = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    Vec x0 = origin;
    if (r > 0) x0 = project_ball(origin + random_offset(rng, origin.size(), settings.restart_scale), ball);
    SgdState state(settings.seed + 7919 * (r + 1));
    try {
      const Vec w = inner_solve(objective, x0, settings.iterations, settings.eta, ball, cfg, state);
      const double value = objective.total(w);
      if (std::isfinite(value) && value < best.value) best = {w, value, 0.0};
    } catch (const DivergenceError&) {
      ++failures;
    }
  }
  if (keep_start) {
    const double value = objective.total(origin);
    if (value <= best.value) best = {origin, value, 0.0};
  }
  if (!std::isfinite(best.value)) {
    throw DivergenceError("all " + std::to_string(failures) + " solver restarts diverged", 0);
  }
  best.solver_gap = gradient_mapping(objective, best.minimizer, ball, settings.eta);
  return best;
}

MoreauResult moreau_eval(const FiniteSumObjective& phi, const Vec& w, double gamma, double radius,
                         const SolverSettings& settings) {
  if (!(gamma > 0.0 && std::isfinite(gamma))) throw std::invalid_argument("Moreau envelope needs 0 < gamma < inf");
  if (!(radius > 0.0)) throw std::invalid_argument("Moreau envelope needs r > 0");
  // One quadratic on the sum: spread 1/(2 gamma) over the components.
  const double per_component = gamma * static_cast<double>(std::max<std::size_t>(phi.size(), 1));
  const ProximalObjective envelope(phi, w, per_component);
  const BallConstraint ball{w, radius};
  const MinimizeResult min = minimize_over_ball(envelope, w, ball, settings, true);
  return {min.value, min.minimizer, (w - min.minimizer) / gamma, min.solver_gap};
}

InsignificanceReport zeta_ratio(const FiniteSumObjective& phi1, const FiniteSumObjective& phi2, const Vec& w,
                                const Vec& phi1_minimizer, double min_denominator) {
  InsignificanceReport rep;
  const double phi1_w = phi1.total(w);
  rep.minimizer = phi1_minimizer;
  rep.numerator = std::abs(phi2.total(phi1_minimizer) - phi2.total(w));
  rep.denominator = phi1_w - phi1.total(phi1_minimizer);
  rep.tolerance = min_denominator * std::max(1.0, std::abs(phi1_w));
  rep.measurable = rep.denominator > rep.tolerance;
  rep.zeta = rep.measurable ? rep.numerator / rep.denominator : std::nan("");
  return rep;
}

InsignificanceReport zeta_insignificance(const FiniteSumObjective& phi1, const FiniteSumObjective& phi2,
                                         const Vec& w, const BallConstraint& domain, const SolverSettings& settings,
                                         double min_denominator) {
  const MinimizeResult min = minimize_over_ball(phi1, w, domain, settings, true);
  InsignificanceReport rep = zeta_ratio(phi1, phi2, w, min.minimizer, min_denominator);
  rep.solver_gap = min.solver_gap;
  return rep;
}

PropertyReport property_checks(const FiniteSumObjective& phi, const FiniteSumObjective& psi, const Vec& w,
                               const BallConstraint& domain, double zeta, const SolverSettings& settings,
                               double tolerance) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw std::invalid_argument("property checks need 0 <= zeta < 1");
  const SumObjective h(phi, psi);
  const MinimizeResult phi_min = minimize_over_ball(phi, w, domain, settings, true);
  const MinimizeResult h_min = minimize_over_ball(h, w, domain, settings, true);

  const double h_w = h.total(w);
  const double h_at_phi_min = h.total(phi_min.minimizer);
  const double h_lowest = std::min(h_min.value, h_at_phi_min);
  const double delta_phi = phi.total(w) - phi_min.value;
  const double delta_h = h_w - h_lowest;

  PropertyReport rep;
  rep.tolerance = tolerance;
  rep.property1_margin = h_w - (1.0 - zeta) * delta_phi - h_at_phi_min;
  rep.property2_lower_margin = delta_h - (1.0 - zeta) * delta_phi;
  rep.property2_upper_margin = (1.0 + zeta) * delta_phi - delta_h;
  rep.property1_holds = rep.property1_margin >= -tolerance;
  rep.property2_holds = rep.property2_lower_margin >= -tolerance;
  return rep;
}

double theorem3_zeta(const std::vector<double>& complement_lipschitz, double mu, std::size_t subset_size,
                     double distance) {
  if (!(mu > 0.0) || subset_size == 0) throw std::invalid_argument("theorem3_zeta needs mu > 0 and |S| > 0");
  if (!(distance > 0.0)) throw std::invalid_argument("theorem3_zeta needs a positive distance to the minimizer");
  double sum = 0.0;
  for (double l : complement_lipschitz) {
    if (l < 0.0) throw std::invalid_argument("Lipschitz constants must be >= 0");
    sum += l;
  }
  return 2.0 * sum / (mu * static_cast<double>(subset_size) * distance);
}

QuadraticEnsemble::QuadraticEnsemble(std::vector<Vec> centers, std::vector<double> curvatures)
    : centers_(std::move(centers)), curvatures_(std::move(curvatures)) {
  if (centers_.empty() || centers_.size() != curvatures_.size()) {
    throw std::invalid_argument("quadratic ensemble needs matching, non-empty centers and curvatures");
  }
  for (double mu : curvatures_) {
    if (!(mu > 0.0)) throw std::invalid_argument("quadratic curvatures must be > 0");
  }
}

QuadraticEnsemble QuadraticEnsemble::random(std::size_t count, std::size_t dim, double mu_min, double mu_max,
                                            double center_scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, center_scale);
  std::uniform_real_distribution<double> curv(mu_min, mu_max);
  std::vector<Vec> centers;
  std::vector<double> mus;
  for (std::size_t i = 0; i < count; ++i) {
    Vec c(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = normal(rng);
    centers.push_back(std::move(c));
    mus.push_back(curv(rng));
  }
  return QuadraticEnsemble(std::move(centers), std::move(mus));
}

double QuadraticEnsemble::strong_convexity() const {
  return *std::min_element(curvatures_.begin(), curvatures_.end());
}

double QuadraticEnsemble::value(const IndexList& subset, const Vec& w) const {
  double sum = 0.0;
  for (std::size_t i : subset) sum += 0.5 * curvatures_[i] * (w - centers_[i]).squaredNorm();
  return sum;
}

Vec QuadraticEnsemble::minimizer(const IndexList& subset, const Vec& center, double radius) const {
  if (subset.empty()) return center;
  Vec weighted = Vec::Zero(centers_.front().size());
  double mass = 0.0;
  for (std::size_t i : subset) {
    weighted += curvatures_[i] * centers_[i];
    mass += curvatures_[i];
  }
  // Isotropic curvature: the constrained minimizer is the projection of the
  // unconstrained one.
  return project_ball(weighted / mass, BallConstraint{center, radius});
}

double QuadraticEnsemble::local_lipschitz(std::size_t i, const Vec& w0, double radius) const {
  return curvatures_[i] * ((w0 - centers_[i]).norm() + 0.5 * radius);
}

double QuadraticEnsemble::opsc_margin(const IndexList& subset, const Vec& w0, double radius) const {
  const Vec w_star = minimizer(subset, w0, radius);
  const double mu = strong_convexity();
  return value(subset, w0) - value(subset, w_star) -
         0.5 * mu * static_cast<double>(subset.size()) * (w0 - w_star).squaredNorm();
}

QuadraticEnsemble::Theorem3Check QuadraticEnsemble::theorem3_check(const IndexList& subset, const Vec& w0,
                                                                    double radius) const {
  IndexList sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  IndexList rest;
  std::vector<double> lips;
  for (std::size_t i = 0, k = 0; i < size(); ++i) {
    if (k < sorted.size() && sorted[k] == i) {
      ++k;
      continue;
    }
    rest.push_back(i);
    lips.push_back(local_lipschitz(i, w0, radius));
  }
  const Vec w_star = minimizer(sorted, w0, radius);
  Theorem3Check out;
  out.distance = (w0 - w_star).norm();
  out.formula = out.distance > 0.0 ? theorem3_zeta(lips, strong_convexity(), sorted.size(), out.distance) : kInfinity;
  const double progress = value(sorted, w0) - value(sorted, w_star);
  const double change = std::abs(value(rest, w_star) - value(rest, w0));
  out.measured = progress > 0.0 ? change / progress : (change == 0.0 ? 0.0 : kInfinity);
  return out;
}

std::pair<double, double> fit_proportional(const std::vector<std::pair<std::size_t, double>>& points) {
  if (points.empty()) return {0.0, 0.0};
  double sxx = 0.0;
  double sxy = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, y] : points) {
    const double xd = static_cast<double>(x);
    sxx += xd * xd;
    sxy += xd * y;
    mean_y += y;
  }
  mean_y /= static_cast<double>(points.size());
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - slope * static_cast<double>(x);
    ss_res += r * r;
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  // Relative round-off floor so an exactly proportional sample reads as R^2 = 1.
  const double scale = std::max(ss_tot, 1e-300);
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / scale : (ss_res <= 1e-24 ? 1.0 : 0.0);
  return {slope, r2};
}

OpscResult opsc_probe(const ModelSpec& model, const Dataset& data, const Vec& w0, const OpscSettings& settings) {
  if (settings.repeats < 1) throw std::invalid_argument("opsc_probe needs repeats >= 1");
  for (double f : settings.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("opsc_probe fractions must lie in (0, 1]");
  }
  const std::size_t n = data.size();
  const BallConstraint ball{w0, settings.radius};
  std::mt19937_64 rng(settings.seed);

  OpscResult out;
  for (double fraction : settings.fractions) {
    const std::size_t size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)), 1, n);
    OpscRow row;
    row.fraction = fraction;
    row.subset_size = size;
    std::vector<double> drops;
    double dist_sum = 0.0;
    for (std::size_t rep = 0; rep < settings.repeats; ++rep) {
      IndexList pool = iota_indices(n);
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(size);
      std::sort(pool.begin(), pool.end());
      const DatasetObjective h_s(model, data, pool);
      SolverSettings solver = settings.solver;
      solver.seed = settings.solver.seed + 104729 * (out.points.size() + row.failures + 1);
      try {
        const MinimizeResult min = minimize_over_ball(h_s, w0, ball, solver, true);
        const double drop = h_s.total(w0) - min.value;
        drops.push_back(drop);
        dist_sum += (w0 - min.minimizer).norm();
        out.points.emplace_back(size, drop);
      } catch (const DivergenceError&) {
        ++row.failures;
      }
    }
    row.repeats = drops.size();
    if (!drops.empty()) {
      row.mean_drop = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(drops.size());
      double ss = 0.0;
      for (double d : drops) ss += (d - row.mean_drop) * (d - row.mean_drop);
      row.std_drop = drops.size() > 1 ? std::sqrt(ss / static_cast<double>(drops.size() - 1)) : 0.0;
      row.mean_distance = dist_sum / static_cast<double>(drops.size());
    }
    out.rows.push_back(row);
  }
  std::tie(out.slope, out.r_squared) = fit_proportional(out.points);
  return out;
}

IntervalInstance IntervalInstance::counter_example() { return {{1.5, -1.0}, {0.0, 2.0}, 0.0, 1.0}; }

std::vector<double> IntervalInstance::losses(double w) const {
  std::vector<double> out(slopes.size());
  for (std::size_t i = 0; i < slopes.size(); ++i) out[i] = slopes[i] * w + intercepts[i];
  return out;
}

double IntervalInstance::minimize(const IndexList& subset) const {
  double slope = 0.0;
  for (std::size_t i : subset) slope += slopes[i];
  return slope < 0.0 ? hi : lo;
}

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

void finish_sequence(SequenceResult& out, std::size_t period) {
  out.cycle_period = period;
  if (period == 1) {
    out.converged = true;
    out.verdict = "converged (fixed point)";
  } else if (period > 1) {
    out.verdict = "divergent (period-" + std::to_string(period) + ")";
  } else {
    out.verdict = "no cycle detected";
  }
}

}  // namespace

SequenceResult max_loss_selection_run(const IntervalInstance& inst, double w0, std::size_t iterations) {
  SequenceResult out;
  std::vector<double> states{w0};
  std::size_t period = 0;
  double w = w0;
  for (std::size_t k = 0; k < iterations; ++k) {
    const auto losses = inst.losses(w);
    const auto pick = static_cast<std::size_t>(std::max_element(losses.begin(), losses.end()) - losses.begin());
    w = inst.minimize({pick});
    out.iterates.push_back(w);
    if (period == 0) {
      for (std::size_t j = states.size(); j-- > 0;) {
        if (states[j] == w) {
          period = states.size() - j;
          break;
        }
      }
    }
    states.push_back(w);
  }
  finish_sequence(out, period);
  return out;
}

SequenceResult delta_selection_run(const IntervalInstance& inst, double w0, double alpha, std::size_t iterations) {
  SequenceResult out;
  std::vector<std::pair<double, double>> states;  // (w_t, w_{t-1})
  std::size_t period = 0;
  double prev = w0;
  double w = inst.minimize(iota_indices(inst.slopes.size()));
  out.iterates.push_back(w);
  states.emplace_back(w, prev);
  for (std::size_t k = 1; k < iterations; ++k) {
    const IndexList subset = select_subset(to_vec(inst.losses(w)), to_vec(inst.losses(prev)), alpha);
    prev = w;
    w = inst.minimize(subset);
    out.iterates.push_back(w);
    const std::pair<double, double> state{w, prev};
    if (period == 0) {
      for (std::size_t j = states.size(); j-- > 0;) {
        if (states[j] == state) {
          period = states.size() - j;
          break;
        }
      }
    }
    states.push_back(state);
  }
  // A repeated (w, w_prev) pair with w == w_prev is a fixed point.
  if (period > 0 && out.iterates.size() >= 2 && out.iterates.back() == out.iterates[out.iterates.size() - 2]) {
    period = 1;
  }
  finish_sequence(out, period);
  return out;
}

NoiseProbe loss_noise_probe(const IntervalInstance& inst, double w_prev, double w, const std::vector<double>& eps) {
  if (eps.size() != inst.slopes.size()) throw std::invalid_argument("noise vector length mismatch");
  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  auto now = inst.losses(w);
  auto before = inst.losses(w_prev);
  NoiseProbe out;
  out.max_loss_pick = argmax(now);
  out.delta_order = rank_by_delta(loss_deltas(to_vec(now), to_vec(before)));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    now[i] += eps[i];
    before[i] += eps[i];
  }
  out.max_loss_pick_noisy = argmax(now);
  out.delta_order_noisy = rank_by_delta(loss_deltas(to_vec(now), to_vec(before)));
  return out;
}

}  // namespace adass::probes
