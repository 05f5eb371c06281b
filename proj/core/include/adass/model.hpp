#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "adass/dataset.hpp"
#include "adass/types.hpp"

namespace adass {

enum class ModelKind { LeastSquares, Logistic, Mlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Shape of a model whose per-sample loss f_i(w) we can differentiate by hand.
///
/// - LeastSquares: f_i(w) = 1/2 (y_i - x_i^T w)^2, D = d.
/// - Logistic: binary cross-entropy on labels {0,1}, no bias, D = d.
/// - Mlp: one tanh hidden layer of width `hidden`. With num_classes == 0 the
///   head is a scalar with squared loss, otherwise softmax cross-entropy.
///   Parameters are packed as [W1 (hidden x d), b1, W2 (out x hidden), b2],
///   matrices row-major.
///
/// Every kind adds (l2 / 2) * ||w||^2 to each f_i.
struct ModelSpec {
  ModelKind kind = ModelKind::LeastSquares;
  std::size_t input_dim = 1;
  std::size_t hidden = 0;
  std::size_t num_classes = 0;
  double l2 = 0.0;

  static ModelSpec least_squares(std::size_t d, double l2 = 0.0);
  static ModelSpec logistic(std::size_t d, double l2 = 0.0);
  static ModelSpec mlp(std::size_t d, std::size_t hidden, std::size_t num_classes, double l2 = 0.0);

  std::size_t output_dim() const;
  std::size_t param_count() const;
  bool is_convex() const { return kind != ModelKind::Mlp; }

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  /// Throws std::invalid_argument if the dataset does not fit this model.
  void check_compatible(const Dataset& data) const;
};

struct SampleEval {
  double loss = 0.0;
  Vec grad;
};

struct BatchEval {
  double loss = 0.0;
  Vec grad;
};

/// Loss and exact gradient of f_i at w.
SampleEval per_sample_eval(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i);

/// f_i(w) only; skips the backward pass.
double per_sample_loss(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i);

/// Adds grad f_i(w) into `grad` and returns f_i(w). No bounds checks.
double accumulate_sample(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i,
                         Vec& grad);

/// Mean loss and mean gradient over S, summed in the order given.
BatchEval batch_eval(const ModelSpec& model, const Vec& w, const Dataset& data, const IndexList& subset);

/// f_i(w) for every sample. Parallel map with an order-independent gather.
Vec loss_sweep(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t threads = 1);

/// F(w) = (1/n) sum_i f_i(w), accumulated in ascending index order.
double full_loss(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t threads = 1);

/// Fraction of correctly classified samples; NaN for regression data.
double accuracy(const ModelSpec& model, const Vec& w, const Dataset& data);

/// Raw model output (logit, scalar prediction, or class scores).
Vec predict(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i);

/// Zeros for linear kinds; N(0, 1/fan_in) weights and zero biases for the MLP.
Vec init_params(const ModelSpec& model, std::uint64_t seed);

}  // namespace adass
