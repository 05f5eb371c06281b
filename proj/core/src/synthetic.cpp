#include "adass/synthetic.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace adass {

std::string_view to_string(FeatureDist dist) {
  switch (dist) {
    case FeatureDist::Uniform: return "uniform";
    case FeatureDist::Gaussian: return "gaussian";
    case FeatureDist::Binomial: return "binomial";
  }
  return "unknown";
}

FeatureDist parse_feature_dist(std::string_view name) {
  if (name == "uniform") return FeatureDist::Uniform;
  if (name == "gaussian") return FeatureDist::Gaussian;
  if (name == "binomial") return FeatureDist::Binomial;
  throw std::invalid_argument("unknown distribution '" + std::string(name) +
                              "' (valid: uniform, gaussian, binomial)");
}

SyntheticRegression generate_synthetic(FeatureDist dist, std::size_t n, std::size_t d, double noise_sigma,
                                       std::uint64_t seed) {
  if (d < 1 || n <= d) throw std::invalid_argument("generate_synthetic needs n > d >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::binomial_distribution<int> binomial(10, 0.3);

  Vec w_true(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w_true.size(); ++j) w_true[j] = normal(rng);

  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      switch (dist) {
        case FeatureDist::Uniform: x(i, j) = uniform(rng); break;
        case FeatureDist::Gaussian: x(i, j) = normal(rng); break;
        case FeatureDist::Binomial: x(i, j) = static_cast<double>(binomial(rng)); break;
      }
    }
  }

  Vec y = x * w_true;
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(rng);
  }
  return {Dataset(std::move(x), std::move(y)), std::move(w_true)};
}

Dataset make_separable_logistic(std::size_t n, std::size_t d, double margin, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("make_separable_logistic needs n, d >= 1");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec u(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = normal(rng);
  u.normalize();

  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vec y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
    const double proj = x.row(i).dot(u);
    const double side = proj >= 0.0 ? 1.0 : -1.0;
    if (std::abs(proj) < margin) x.row(i) += (side * margin - proj) * u.transpose();
    y[i] = side > 0.0 ? 1.0 : 0.0;
  }
  return Dataset(std::move(x), std::move(y), 2);
}

Dataset make_blobs(std::size_t n, std::size_t d, std::size_t num_classes, double spread, std::uint64_t seed) {
  if (n < num_classes || d < 1 || num_classes < 2) {
    throw std::invalid_argument("make_blobs needs num_classes >= 2, n >= num_classes, d >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  RowMatrix centers(static_cast<Eigen::Index>(num_classes), static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(c, j) = spread * normal(rng);
  }

  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vec y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(static_cast<std::size_t>(i) % num_classes);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = centers(c, j) + normal(rng);
    y[i] = static_cast<double>(c);
  }
  return Dataset(std::move(x), std::move(y), num_classes);
}

}  // namespace adass
