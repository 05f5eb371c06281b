#include "adass/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "adass/adass.hpp"
#include "adass/csv.hpp"
#include "adass/lsq_oracle.hpp"
#include "adass/parallel.hpp"
#include "adass/probes.hpp"
#include "adass/synthetic.hpp"

namespace adass {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTaskKeys{"dataset", "model", "n", "d", "hidden", "classes", "margin", "spread", "l2",
                                      "data_seed"};

std::set<std::string> with_task_keys(std::set<std::string> keys) {
  keys.insert(kTaskKeys.begin(), kTaskKeys.end());
  return keys;
}

std::size_t thread_count(const Config& cfg) {
  return std::max<std::size_t>(cfg.get_size("threads", default_threads()), 1);
}

// Shared error mapping for every subcommand.
int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    log << "error: diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

void prepare_output(const Config& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  cfg.write(out_dir / "resolved.cfg");
}

OptimizerConfig optimizer_from(const Config& cfg, const OptimizerConfig& defaults) {
  OptimizerConfig opt = defaults;
  opt.method = parse_method(cfg.get_string("method", std::string(to_string(defaults.method))));
  opt.eta = cfg.get_double("eta", defaults.eta);
  opt.beta = cfg.get_double("beta", defaults.beta);
  opt.decay = cfg.get_double("decay", defaults.decay);
  opt.batch = cfg.get_size("batch", defaults.batch);
  opt.epochs = cfg.get_size("epochs", defaults.epochs);
  opt.seed = cfg.get_u64("seed", defaults.seed);
  opt.sampling = parse_sampling(cfg.get_string("sampling", std::string(to_string(defaults.sampling))));
  opt.validate();
  return opt;
}

// Training defaults tuned for the two bundled tasks.
OptimizerConfig default_optimizer(const Task& task) {
  OptimizerConfig opt;
  opt.method = Method::Msgd;
  opt.beta = 0.9;
  opt.batch = 10;
  if (task.model.kind == ModelKind::Mlp) {
    opt.eta = 0.03;
    opt.decay = 0.97;
    opt.epochs = 150;
  } else {
    opt.eta = 0.05;
    opt.decay = 0.98;
    opt.epochs = 100;
  }
  return opt;
}

AdassConfig adass_from(const Config& cfg, const Task& task) {
  AdassConfig ac;
  ac.optimizer = optimizer_from(cfg, default_optimizer(task));
  ac.alpha_sel = cfg.get_double("alpha_sel", 0.99);
  ac.period = cfg.get_size("period", 5);
  ac.gamma = cfg.get_double("gamma", kInfinity);
  ac.radius = cfg.get_double("radius", kInfinity);
  ac.passes = cfg.get_size("passes", 1);
  ac.zeta.every = cfg.get_size("zeta_every", 0);
  ac.zeta.iterations = cfg.get_size("zeta_iterations", 0);
  ac.zeta.restarts = cfg.get_size("zeta_restarts", 3);
  ac.threads = thread_count(cfg);
  ac.validate();
  return ac;
}

struct RunSummary {
  std::string label;
  double alpha = 1.0;
  std::size_t period = 0;
  double wall_ms = 0.0;
  double accuracy = std::nan("");
  double final_loss = 0.0;
  std::size_t samples = 0;
  double ratio = 1.0;
  double rho = 1.0;
};

RunSummary summarize(const std::string& label, const Task& task, const AdassConfig& ac, const AdassTrace& trace) {
  RunSummary s;
  s.label = label;
  s.alpha = ac.alpha_sel;
  s.period = ac.period;
  if (!trace.records.empty()) {
    s.wall_ms = trace.records.back().wall_ms;
    s.final_loss = trace.records.back().full_loss;
  } else {
    s.final_loss = trace.initial_loss;
  }
  if (task.model.kind != ModelKind::LeastSquares) s.accuracy = accuracy(task.model, trace.final_params, task.data);
  s.samples = trace.samples_visited();
  s.ratio = trace.final_ratio();
  s.rho = rho_T(trace, measured_zeta2(trace)).value;
  return s;
}

void write_summary(const fs::path& path, const std::vector<RunSummary>& rows) {
  CsvWriter csv(path, {"run", "alpha_sel", "period", "wall_ms", "accuracy", "final_loss", "samples_visited",
                       "final_ratio", "rho_T"});
  for (const auto& r : rows) {
    csv.row({r.label, format_double(r.alpha), std::to_string(r.period), format_double(r.wall_ms),
             format_double(r.accuracy), format_double(r.final_loss), std::to_string(r.samples),
             format_double(r.ratio), format_double(r.rho)});
  }
}

Task task_from(const Config& cfg, const std::string& default_dataset) {
  return make_task(cfg.get_string("dataset", default_dataset), cfg.get_string("model", ""), cfg);
}


// ---- probes ----------------------------------------------------------------

int probe_negative_example(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  const std::size_t iterations = cfg.get_size("iterations", 100);
  const double alpha = cfg.get_double("alpha_sel", 0.5);
  const auto inst = probes::IntervalInstance::counter_example();
  const auto max_loss = probes::max_loss_selection_run(inst, 0.0, iterations);
  const auto delta = probes::delta_selection_run(inst, 0.0, alpha, iterations);

  CsvWriter csv(out_dir / "negative_example.csv", {"iteration", "max_loss_w", "delta_w"});
  for (std::size_t k = 0; k < iterations; ++k) {
    csv.row({std::to_string(k + 1), format_double(max_loss.iterates[k]), format_double(delta.iterates[k])});
  }

  log << "max-loss selection:";
  for (std::size_t k = 0; k < std::min<std::size_t>(iterations, 12); ++k) {
    log << (k ? "," : " ") << format_double(max_loss.iterates[k]);
  }
  log << (iterations > 12 ? ",..." : "") << "\nverdict: " << max_loss.verdict << '\n';
  log << "delta-loss selection: w = " << format_double(delta.iterates.back()) << ", verdict: " << delta.verdict
      << '\n';

  bool alternating = iterations > 0;
  for (std::size_t k = 0; k < iterations; ++k) {
    if (max_loss.iterates[k] != (k % 2 == 0 ? 1.0 : 0.0)) alternating = false;
  }
  const bool fixed = delta.converged && delta.iterates.back() == 0.0;
  return alternating && fixed ? kExitOk : kExitCheckFailed;
}

int probe_opsc(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  Config task_cfg = cfg;
  if (!task_cfg.has("classes")) task_cfg.set("classes", "10");
  const Task task = task_from(task_cfg, "mlp-blobs");
  probes::OpscSettings settings;
  settings.fractions = cfg.get_doubles("fractions", settings.fractions);
  settings.repeats = cfg.get_size("repeats", settings.repeats);
  settings.radius = cfg.get_double("radius", settings.radius);
  settings.solver.iterations = cfg.get_size("solver_iterations", settings.solver.iterations);
  settings.solver.eta = cfg.get_double("eta", settings.solver.eta);
  settings.solver.batch = cfg.get_size("batch", settings.solver.batch);
  settings.seed = cfg.get_u64("seed", settings.seed);
  const double min_r2 = cfg.get_double("min_r2", 0.9);

  const auto result = probes::opsc_probe(task.model, task.data, initial_params(task, cfg), settings);
  CsvWriter rows(out_dir / "opsc.csv",
                 {"fraction", "subset_size", "mean_drop", "std_drop", "mean_distance", "repeats", "failures"});
  for (const auto& r : result.rows) {
    rows.row({format_double(r.fraction), std::to_string(r.subset_size), format_double(r.mean_drop),
              format_double(r.std_drop), format_double(r.mean_distance), std::to_string(r.repeats),
              std::to_string(r.failures)});
  }
  CsvWriter points(out_dir / "opsc_points.csv", {"subset_size", "drop"});
  for (const auto& [size, drop] : result.points) points.row({std::to_string(size), format_double(drop)});

  log << "drop ~ " << format_double(result.slope) << " * |S|, R^2 = " << format_double(result.r_squared) << '\n';
  return result.r_squared >= min_r2 ? kExitOk : kExitCheckFailed;
}

int probe_zeta(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  const Task task = task_from(cfg, "mlp-blobs");
  Config run_cfg = cfg;
  if (!run_cfg.has("zeta_every")) run_cfg.set("zeta_every", "1");
  const AdassConfig ac = adass_from(run_cfg, task);
  const double min_fraction = cfg.get_double("min_fraction", 0.95);

  const AdassTrace trace = adass_train(task.model, task.data, initial_params(task, cfg), ac);
  write_adass_trace(out_dir / "trace.csv", trace);

  std::size_t probes_run = 0;
  std::size_t below_one = 0;
  double worst = 0.0;
  for (const auto& rec : trace.records) {
    if (rec.subset_size == task.data.size()) continue;  // empty complement: zeta is 0 trivially
    for (const auto& z : {rec.zeta1, rec.zeta2}) {
      if (!z) continue;
      ++probes_run;
      if (*z < 1.0) ++below_one;
      worst = std::max(worst, *z);
    }
  }
  const double rho = rho_T(trace).value;
  const double fraction = probes_run ? static_cast<double>(below_one) / static_cast<double>(probes_run) : 0.0;
  log << "zeta probes: " << below_one << "/" << probes_run << " below 1 (max " << format_double(worst)
      << "), rho_T(zeta=0) = " << format_double(rho) << '\n';
  const bool rho_ok = ac.alpha_sel >= 1.0 || rho < 1.0;
  return probes_run > 0 && fraction >= min_fraction && rho_ok ? kExitOk : kExitCheckFailed;
}

int probe_moreau(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  const Task task = task_from(cfg, "logistic-separable");
  const double gamma = cfg.get_double("gamma", 1.0);
  const double radius = cfg.get_double("radius", kInfinity);
  const std::size_t count = cfg.get_size("probes", 5);
  const double h = cfg.get_double("h", 1e-4);
  const double tol = cfg.get_double("tolerance", 1e-3);
  probes::SolverSettings solver;
  solver.iterations = cfg.get_size("solver_iterations", 3000);
  solver.eta = cfg.get_double("eta", 0.5);
  solver.restarts = 3;

  const DatasetObjective phi(task.model, task.data);
  std::mt19937_64 rng(cfg.get_u64("seed", 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  CsvWriter csv(out_dir / "moreau.csv", {"probe", "value", "grad_dot_u", "finite_difference", "rel_error"});
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    Vec w(static_cast<Eigen::Index>(task.model.param_count()));
    Vec u(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = 0.5 * normal(rng);
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = normal(rng);
    u.normalize();
    const auto at = probes::moreau_eval(phi, w, gamma, radius, solver);
    const double plus = probes::moreau_eval(phi, w + h * u, gamma, radius, solver).value;
    const double minus = probes::moreau_eval(phi, w - h * u, gamma, radius, solver).value;
    const double fd = (plus - minus) / (2.0 * h);
    const double analytic = at.gradient.dot(u);
    const double err = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
    worst = std::max(worst, err);
    csv.row({std::to_string(k), format_double(at.value), format_double(analytic), format_double(fd),
             format_double(err)});
  }
  log << "moreau gradient vs finite differences: max relative error " << format_double(worst) << '\n';
  return worst <= tol ? kExitOk : kExitCheckFailed;
}

int probe_theorem1(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto dists = cfg.get_strings("dists", {"uniform", "gaussian", "binomial"});
  const std::size_t n = cfg.get_size("n", 1000);
  const std::size_t d = cfg.get_size("d", 10);
  const double sigma = cfg.get_double("sigma", 0.1);
  const auto ratios = cfg.get_doubles("ratios", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::size_t num_seeds = cfg.get_size("num_seeds", 20);
  const std::size_t threads = thread_count(cfg);
  std::vector<FeatureDist> parsed;
  for (const auto& name : dists) parsed.push_back(parse_feature_dist(name));
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("ratios must lie in (0, 1]");
  }

  struct Row {
    std::string dist;
    std::uint64_t seed;
    std::string order;
    lsq::Theorem1Report rep;
  };
  std::vector<std::vector<Row>> per_job(parsed.size() * num_seeds);
  parallel_for(per_job.size(), threads, [&](std::size_t job) {
    const FeatureDist dist = parsed[job / num_seeds];
    const std::uint64_t s = seed + job % num_seeds;
    const auto problem = generate_synthetic(dist, n, d, sigma, s);
    const Vec w_star = lsq::solve_full(problem.data);
    for (auto crit : {lsq::Criterion::Lipschitz, lsq::Criterion::Loss, lsq::Criterion::Random}) {
      const IndexList order = lsq::criterion_order(problem.data, w_star, crit, s);
      const std::size_t m0 = lsq::min_full_rank_prefix(problem.data, order);
      for (double r : ratios) {
        const auto m = std::max(m0, static_cast<std::size_t>(std::ceil(r * static_cast<double>(n) - 1e-9)));
        per_job[job].push_back({std::string(to_string(dist)), s, std::string(lsq::to_string(crit)),
                                lsq::theorem1_report(problem.data, order, m)});
      }
    }
  });

  CsvWriter csv(out_dir / "theorem1.csv",
                {"dist", "seed", "order", "m", "gap_sq", "loss_bound", "lip_bound", "a", "b"});
  std::size_t checked = 0;
  std::size_t violations = 0;
  for (const auto& rows : per_job) {
    for (const auto& row : rows) {
      ++checked;
      if (!row.rep.loss_bound_holds() || !row.rep.lip_bound_holds()) ++violations;
      csv.row({row.dist, std::to_string(row.seed), row.order, std::to_string(row.rep.m),
               format_double(row.rep.gap_sq), format_double(row.rep.loss_bound), format_double(row.rep.lip_bound),
               format_double(row.rep.a), format_double(row.rep.b)});
    }
  }
  log << "theorem1: " << checked << " subsets checked, " << violations << " bound violations\n";
  return violations == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

AdassConfig training_config(const Config& cfg, const Task& task) { return adass_from(cfg, task); }

Vec initial_params(const Task& task, const Config& cfg) {
  return init_params(task.model, cfg.get_u64("init_seed", cfg.get_u64("seed", 1)));
}

Task make_task(const std::string& dataset, const std::string& model, const Config& cfg) {
  const double l2 = cfg.get_double("l2", 0.0);
  const std::uint64_t data_seed = cfg.get_u64("data_seed", 1);
  Task task;
  task.name = dataset;
  if (dataset == "logistic-separable") {
    if (!model.empty() && model != "logistic") throw ConfigError("dataset logistic-separable needs model=logistic");
    const std::size_t d = cfg.get_size("d", 10);
    task.data = make_separable_logistic(cfg.get_size("n", 500), d, cfg.get_double("margin", 0.1), data_seed);
    task.model = ModelSpec::logistic(d, l2);
  } else if (dataset == "mlp-blobs") {
    if (!model.empty() && model != "mlp") throw ConfigError("dataset mlp-blobs needs model=mlp");
    const std::size_t d = cfg.get_size("d", 8);
    const std::size_t classes = cfg.get_size("classes", 3);
    task.data = make_blobs(cfg.get_size("n", 1000), d, classes, cfg.get_double("spread", 1.25), data_seed);
    task.model = ModelSpec::mlp(d, cfg.get_size("hidden", 6), classes, l2);
  } else {
    if (model.empty()) throw ConfigError("a CSV dataset needs model=least-squares|logistic|mlp");
    const ModelKind kind = parse_model_kind(model);
    const std::size_t classes = kind == ModelKind::Mlp ? cfg.get_size("classes", 0) : 0;
    task.data = load_csv_dataset(dataset, classes);
    const std::size_t d = task.data.dim();
    switch (kind) {
      case ModelKind::LeastSquares: task.model = ModelSpec::least_squares(d, l2); break;
      case ModelKind::Logistic: task.model = ModelSpec::logistic(d, l2); break;
      case ModelKind::Mlp: task.model = ModelSpec::mlp(d, cfg.get_size("hidden", 16), classes, l2); break;
    }
  }
  task.model.check_compatible(task.data);
  return task;
}

const std::set<std::string>& lsq_criteria_keys() {
  static const std::set<std::string> keys{"dists", "n", "d", "sigma", "ratios", "seed", "num_seeds", "threads"};
  return keys;
}

const std::set<std::string>& adass_train_keys() {
  static const std::set<std::string> keys = with_task_keys(
      {"method", "eta", "beta", "decay", "batch", "epochs", "seed", "init_seed", "sampling", "alpha_sel", "period",
       "gamma", "radius", "passes", "zeta_every", "zeta_iterations", "zeta_restarts", "threads", "compare"});
  return keys;
}

const std::set<std::string>& probe_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = adass_train_keys();
    k.insert({"iterations", "fractions", "repeats", "solver_iterations", "min_r2", "min_fraction", "probes", "h",
              "tolerance", "dists", "sigma", "ratios", "num_seeds"});
    return k;
  }();
  return keys;
}

int cmd_lsq_criteria(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    cfg.require_known(lsq_criteria_keys());
    std::vector<FeatureDist> dists;
    for (const auto& name : cfg.get_strings("dists", {"uniform", "gaussian", "binomial"})) {
      dists.push_back(parse_feature_dist(name));
    }
    lsq::CriteriaConfig base;
    base.n = cfg.get_size("n", base.n);
    base.d = cfg.get_size("d", base.d);
    base.noise_sigma = cfg.get_double("sigma", base.noise_sigma);
    base.ratios = cfg.get_doubles("ratios", base.ratios);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const std::size_t num_seeds = cfg.get_size("num_seeds", 20);
    if (num_seeds == 0) throw ConfigError("num_seeds must be >= 1");
    for (std::size_t k = 0; k < num_seeds; ++k) base.seeds.push_back(seed + k);
    base.threads = thread_count(cfg);
    prepare_output(cfg, out_dir);

    bool ordered = true;
    for (FeatureDist dist : dists) {
      lsq::CriteriaConfig cc = base;
      cc.dist = dist;
      const auto rows = lsq::criteria_experiment(cc);
      write_criteria_table(out_dir / ("criteria_" + std::string(to_string(dist)) + ".csv"), rows);
      for (const auto& row : rows) {
        if (row.criterion == lsq::Criterion::Random) continue;
        const auto random = std::find_if(rows.begin(), rows.end(), [&](const lsq::CriteriaRow& r) {
          return r.criterion == lsq::Criterion::Random && r.ratio == row.ratio;
        });
        const bool checked = row.criterion == lsq::Criterion::Lipschitz || row.ratio >= 0.3 - 1e-12;
        const double slack = 1e-12 * std::max(1.0, random->mean_gap);
        if (checked && !(row.mean_gap <= random->mean_gap + slack)) {
          ordered = false;
          log << to_string(dist) << ": " << lsq::to_string(row.criterion) << " gap " << format_double(row.mean_gap)
              << " > random " << format_double(random->mean_gap) << " at ratio " << format_double(row.ratio)
              << '\n';
        }
      }
    }
    log << (ordered ? "criterion ordering holds\n" : "criterion ordering violated\n");
    return ordered ? kExitOk : kExitCheckFailed;
  });
}

int cmd_adass_train(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    cfg.require_known(adass_train_keys());
    const Task task = task_from(cfg, "logistic-separable");
    const auto periods = cfg.get_doubles("period", {5.0});
    const bool compare = cfg.get_bool("compare", false);
    std::vector<AdassConfig> runs;
    for (double p : periods) {
      if (!(p >= 1.0 && std::floor(p) == p)) throw ConfigError("period values must be positive integers");
      Config one = cfg;
      one.set("period", format_double(p));
      runs.push_back(adass_from(one, task));
    }
    prepare_output(cfg, out_dir);
    const Vec w0 = initial_params(task, cfg);

    std::vector<RunSummary> summary;
    if (compare) {
      AdassConfig base = runs.front();
      base.alpha_sel = 1.0;
      const AdassTrace trace = adass_train(task.model, task.data, w0, base);
      write_adass_trace(out_dir / "baseline.csv", trace);
      summary.push_back(summarize("baseline", task, base, trace));
    }
    for (const auto& ac : runs) {
      const AdassTrace trace = adass_train(task.model, task.data, w0, ac);
      const std::string label = runs.size() == 1 ? "trace" : "trace_p" + std::to_string(ac.period);
      write_adass_trace(out_dir / (label + ".csv"), trace);
      summary.push_back(summarize(label, task, ac, trace));
    }
    write_summary(out_dir / "summary.csv", summary);
    for (const auto& s : summary) {
      log << s.label << ": alpha_sel=" << format_double(s.alpha) << " p=" << s.period
          << " final_loss=" << format_double(s.final_loss) << " accuracy=" << format_double(s.accuracy)
          << " samples=" << s.samples << " ratio=" << format_double(s.ratio) << " rho_T=" << format_double(s.rho)
          << '\n';
    }
    return kExitOk;
  });
}

int cmd_probe(const std::string& name, const Config& cfg, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    cfg.require_known(probe_keys());
    using Probe = int (*)(const Config&, const fs::path&, std::ostream&);
    static const std::map<std::string, Probe> table{{"negative-example", probe_negative_example},
                                                    {"opsc", probe_opsc},
                                                    {"zeta", probe_zeta},
                                                    {"moreau", probe_moreau},
                                                    {"theorem1", probe_theorem1}};
    const auto it = table.find(name);
    if (it == table.end()) {
      throw ConfigError("unknown probe '" + name + "' (valid: negative-example, opsc, zeta, moreau, theorem1)");
    }
    prepare_output(cfg, out_dir);
    return it->second(cfg, out_dir, log);
  });
}

}  // namespace adass
