#pragma once

#include <cstdint>
#include <string_view>

#include "adass/dataset.hpp"

namespace adass {

enum class FeatureDist { Uniform, Gaussian, Binomial };

std::string_view to_string(FeatureDist dist);
/// Throws std::invalid_argument naming the valid choices.
FeatureDist parse_feature_dist(std::string_view name);

struct SyntheticRegression {
  Dataset data;
  Vec w_true;
};

/// Features i.i.d. U(0,1), N(0,1) or B(10,0.3) per entry; w_true ~ N(0, I);
/// y_i = x_i^T w_true + N(0, noise_sigma^2). Requires n > d >= 1.
SyntheticRegression generate_synthetic(FeatureDist dist, std::size_t n, std::size_t d, double noise_sigma,
                                       std::uint64_t seed);

/// Linearly separable two-class data through the origin. Features N(0, I);
/// labels are sign(x^T u) for a random unit u, and points with
/// |x^T u| < margin are pushed out to the margin.
Dataset make_separable_logistic(std::size_t n, std::size_t d, double margin, std::uint64_t seed);

/// Gaussian blobs: class centers N(0, spread^2 I), points center + N(0, I).
/// Classes are assigned round-robin so every class is populated.
Dataset make_blobs(std::size_t n, std::size_t d, std::size_t num_classes, double spread, std::uint64_t seed);

}  // namespace adass
