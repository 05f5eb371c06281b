#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "adass/dataset.hpp"
#include "adass/lsq_oracle.hpp"
#include "adass/model.hpp"
#include "adass/synthetic.hpp"
#include "oracles.hpp"

using namespace adass;

namespace {

Dataset tiny_regression() {
  RowMatrix x(1, 2);
  x << 1.0, 0.0;
  Vec y(1);
  y << 2.0;
  return Dataset(x, y);
}

// Central-difference check on f_i for `probes` random (w, i) pairs; returns the worst error.
double worst_fd_error(const ModelSpec& model, const Dataset& data, std::size_t probes, std::uint64_t seed,
                      double w_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const Vec w = oracle::random_vec(rng, static_cast<Eigen::Index>(model.param_count()), w_scale);
    const std::size_t i = pick(rng);
    const auto eval = per_sample_eval(model, w, data, i);
    const Vec fd = oracle::central_difference([&](const Vec& v) { return per_sample_loss(model, v, data, i); }, w);
    worst = std::max(worst, oracle::relative_error(eval.grad, fd));
  }
  return worst;
}

}  // namespace

TEST_CASE("least-squares loss and gradient at a hand-computed point") {
  const Dataset data = tiny_regression();
  const auto eval = per_sample_eval(ModelSpec::least_squares(2), Vec::Zero(2), data, 0);
  CHECK(eval.loss == 2.0);
  CHECK(eval.grad[0] == -2.0);
  CHECK(eval.grad[1] == 0.0);
}

TEST_CASE("logistic loss at w = 0 is ln 2 for either label") {
  const Dataset data = make_separable_logistic(20, 3, 0.1, 4);
  const ModelSpec model = ModelSpec::logistic(3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(per_sample_loss(model, Vec::Zero(3), data, i) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  const auto reg = generate_synthetic(FeatureDist::Gaussian, 50, 4, 0.5, 3).data;
  const Dataset cls = make_separable_logistic(50, 4, 0.2, 3);
  const Dataset blobs = make_blobs(60, 4, 3, 1.5, 3);

  CHECK(worst_fd_error(ModelSpec::least_squares(4, 0.1), reg, 100, 1, 1.0) <= 1e-5);
  CHECK(worst_fd_error(ModelSpec::logistic(4, 0.1), cls, 100, 2, 1.0) <= 1e-5);
  CHECK(worst_fd_error(ModelSpec::mlp(4, 5, 0, 0.01), reg, 100, 3, 0.5) <= 1e-5);
  CHECK(worst_fd_error(ModelSpec::mlp(4, 5, 3, 0.01), blobs, 100, 4, 0.5) <= 1e-5);
}

TEST_CASE("losses are non-negative for every model kind") {
  const auto reg = generate_synthetic(FeatureDist::Uniform, 30, 3, 0.1, 1).data;
  const Dataset blobs = make_blobs(30, 3, 4, 1.0, 1);
  std::mt19937_64 rng(9);
  for (const auto& [model, data] : {std::pair{ModelSpec::least_squares(3, 0.5), &reg},
                                    std::pair{ModelSpec::mlp(3, 4, 0, 0.5), &reg},
                                    std::pair{ModelSpec::mlp(3, 4, 4, 0.5), &blobs}}) {
    for (int k = 0; k < 20; ++k) {
      const Vec w = oracle::random_vec(rng, static_cast<Eigen::Index>(model.param_count()), 3.0);
      for (std::size_t i = 0; i < data->size(); ++i) CHECK(per_sample_loss(model, w, *data, i) >= 0.0);
    }
  }
  const Dataset cls = make_separable_logistic(30, 3, 0.1, 2);
  const Vec far = Vec::Constant(3, 50.0);
  for (std::size_t i = 0; i < cls.size(); ++i) CHECK(per_sample_loss(ModelSpec::logistic(3), far, cls, i) >= 0.0);
}

TEST_CASE("batch_eval is the mean of per-sample evaluations") {
  const auto data = generate_synthetic(FeatureDist::Gaussian, 40, 3, 0.3, 5).data;
  const ModelSpec model = ModelSpec::least_squares(3, 0.05);
  const Vec w = Vec::LinSpaced(3, -1.0, 1.0);

  SUBCASE("singleton") {
    const auto one = per_sample_eval(model, w, data, 7);
    const auto batch = batch_eval(model, w, data, {7});
    CHECK(batch.loss == one.loss);
    CHECK((batch.grad - one.grad).norm() == 0.0);
  }

  SUBCASE("duplicated halves") {
    RowMatrix x(2 * data.size(), 3);
    Vec y(2 * data.size());
    x << data.features(), data.features();
    y << data.targets(), data.targets();
    const Dataset doubled(x, y);
    const auto full = batch_eval(model, w, doubled, iota_indices(doubled.size()));
    const auto half = batch_eval(model, w, data, iota_indices(data.size()));
    CHECK(full.loss == doctest::Approx(half.loss).epsilon(1e-14));
    CHECK(oracle::relative_error(full.grad, half.grad) <= 1e-14);
  }

  SUBCASE("random subset against an independent sum") {
    std::mt19937_64 rng(11);
    IndexList s = iota_indices(data.size());
    std::shuffle(s.begin(), s.end(), rng);
    s.resize(17);
    double loss = 0.0;
    Vec grad = Vec::Zero(3);
    for (std::size_t i : s) {
      const double r = data.target(i) - data.row(i).dot(w);
      loss += 0.5 * r * r + 0.5 * 0.05 * w.squaredNorm();
      grad += -r * data.row(i).transpose() + 0.05 * w;
    }
    const auto batch = batch_eval(model, w, data, s);
    CHECK(std::abs(batch.loss - loss / 17.0) <= 1e-12 * std::max(1.0, std::abs(batch.loss)));
    CHECK((batch.grad - grad / 17.0).norm() <= 1e-12 * std::max(1.0, grad.norm() / 17.0));
  }

  SUBCASE("additivity over disjoint subsets") {
    const IndexList a{0, 3, 5, 9, 10};
    const IndexList b{1, 2, 20, 33};
    IndexList ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double lhs = 9.0 * batch_eval(model, w, data, ab).loss;
    const double rhs = 5.0 * batch_eval(model, w, data, a).loss + 4.0 * batch_eval(model, w, data, b).loss;
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }

  CHECK_THROWS_AS(batch_eval(model, w, data, {}), std::invalid_argument);
}

TEST_CASE("ridge term makes linear and logistic losses lambda-strongly convex") {
  const auto reg = generate_synthetic(FeatureDist::Gaussian, 20, 3, 0.3, 2).data;
  const Dataset cls = make_separable_logistic(20, 3, 0.1, 2);
  const double lambda = 0.3;
  std::mt19937_64 rng(5);
  for (const auto& [model, data] : {std::pair{ModelSpec::least_squares(3, lambda), &reg},
                                    std::pair{ModelSpec::logistic(3, lambda), &cls}}) {
    for (int k = 0; k < 200; ++k) {
      const Vec u = oracle::random_vec(rng, 3, 2.0);
      const Vec v = oracle::random_vec(rng, 3, 2.0);
      const std::size_t i = static_cast<std::size_t>(k) % data->size();
      const auto at_u = per_sample_eval(model, u, *data, i);
      const double at_v = per_sample_loss(model, v, *data, i);
      const double lower = at_u.loss + at_u.grad.dot(v - u) + 0.5 * lambda * (v - u).squaredNorm();
      CHECK(at_v >= lower - 1e-12 * std::max(1.0, std::abs(at_v)));
    }
  }
}

TEST_CASE("evaluation rejects bad indices and parameter sizes") {
  const Dataset data = tiny_regression();
  const ModelSpec model = ModelSpec::least_squares(2);
  CHECK_THROWS_AS(per_sample_eval(model, Vec::Zero(2), data, 1), std::out_of_range);
  CHECK_THROWS_AS(per_sample_eval(model, Vec::Zero(3), data, 0), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::mlp(2, 0, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::least_squares(2, -1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::logistic(2).check_compatible(data), std::invalid_argument);
}

TEST_CASE("dataset invariants") {
  RowMatrix x(2, 1);
  x << 1.0, std::nan("");
  CHECK_THROWS_AS(Dataset(x, Vec::Zero(2)), std::invalid_argument);
  RowMatrix ok(2, 1);
  ok << 1.0, 2.0;
  Vec labels(2);
  labels << 0.0, 3.0;
  CHECK_THROWS_AS(Dataset(ok, labels, 3), std::invalid_argument);
  labels << 0.0, 0.5;
  CHECK_THROWS_AS(Dataset(ok, labels, 3), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(RowMatrix(0, 1), Vec(0)), std::invalid_argument);
}

TEST_CASE("csv datasets round-trip") {
  const auto data = generate_synthetic(FeatureDist::Binomial, 12, 3, 0.2, 8).data;
  const auto path = std::filesystem::temp_directory_path() / "adass_roundtrip.csv";
  write_csv_dataset(path, data);
  const Dataset back = load_csv_dataset(path);
  CHECK(back.size() == 12);
  CHECK(back.dim() == 3);
  CHECK((back.features() - data.features()).norm() == 0.0);
  CHECK((back.targets() - data.targets()).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic generator contract") {
  SUBCASE("noise-free targets recover w_true") {
    for (auto dist : {FeatureDist::Uniform, FeatureDist::Gaussian, FeatureDist::Binomial}) {
      const auto problem = generate_synthetic(dist, 200, 6, 0.0, 21);
      const Vec w = lsq::solve_full(problem.data);
      CHECK((w - problem.w_true).norm() <= 1e-8 * problem.w_true.norm());
    }
  }

  SUBCASE("binomial entries average np = 3") {
    const std::size_t n = 2000;
    const std::size_t d = 10;
    const auto problem = generate_synthetic(FeatureDist::Binomial, n, d, 0.1, 5);
    const double mean = problem.data.features().mean();
    const double sigma = std::sqrt(10.0 * 0.3 * 0.7);
    CHECK(std::abs(mean - 3.0) <= 3.0 * sigma / std::sqrt(static_cast<double>(n * d)));
  }

  SUBCASE("same seed, same bits") {
    const auto a = generate_synthetic(FeatureDist::Gaussian, 50, 4, 0.1, 77);
    const auto b = generate_synthetic(FeatureDist::Gaussian, 50, 4, 0.1, 77);
    CHECK(a.data.features() == b.data.features());
    CHECK(a.data.targets() == b.data.targets());
    CHECK(a.w_true == b.w_true);
  }

  CHECK_THROWS_AS(generate_synthetic(FeatureDist::Uniform, 5, 5, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(FeatureDist::Uniform, 10, 2, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_feature_dist("poisson"), doctest::Contains("uniform"), std::invalid_argument);
}

TEST_CASE("loss sweep is independent of the worker count") {
  const Dataset data = make_blobs(301, 5, 3, 1.0, 2);
  const ModelSpec model = ModelSpec::mlp(5, 7, 3);
  const Vec w = init_params(model, 3);
  const Vec one = loss_sweep(model, w, data, 1);
  const Vec four = loss_sweep(model, w, data, 4);
  CHECK(one == four);
  CHECK(full_loss(model, w, data, 1) == full_loss(model, w, data, 4));
}

TEST_CASE("accuracy on hand-built data") {
  RowMatrix x(3, 1);
  x << 1.0, -2.0, 0.5;
  Vec y(3);
  y << 1.0, 0.0, 1.0;
  const Dataset cls(x, y, 2);
  const ModelSpec model = ModelSpec::logistic(1);
  CHECK(accuracy(model, Vec::Constant(1, 1.0), cls) == 1.0);
  CHECK(accuracy(model, Vec::Constant(1, -1.0), cls) == 0.0);
  const auto reg = generate_synthetic(FeatureDist::Uniform, 20, 2, 0.1, 1).data;
  CHECK(std::isnan(accuracy(ModelSpec::least_squares(2), Vec::Zero(2), reg)));
}
