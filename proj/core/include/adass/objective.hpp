#pragma once

#include <functional>
#include <memory>
#include <span>

#include "adass/model.hpp"
#include "adass/types.hpp"

namespace adass {

/// phi(w) = sum_j phi_j(w) over a fixed number of components.
///
/// Stochastic solvers step on the mean over a minibatch of components; the
/// unscaled sum is what ball-constrained progress measures compare.
class FiniteSumObjective {
 public:
  virtual ~FiniteSumObjective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t size() const = 0;
  virtual double component_value(const Vec& w, std::size_t j) const = 0;
  /// Adds grad phi_j(w) into grad and returns phi_j(w).
  virtual double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const = 0;

  /// Sum over components in ascending order.
  virtual double total(const Vec& w) const;
  double mean(const Vec& w) const;

  /// Mean value and mean gradient over `batch`; grad is overwritten.
  double batch_gradient(const Vec& w, std::span<const std::size_t> batch, Vec& grad) const;
  /// Gradient of the sum.
  Vec total_gradient(const Vec& w) const;
};

/// Components are f_i for the samples in `indices` (all samples when empty).
/// Holds a reference to `data`, which must outlive the objective.
class DatasetObjective final : public FiniteSumObjective {
 public:
  DatasetObjective(const ModelSpec& model, const Dataset& data);
  DatasetObjective(const ModelSpec& model, const Dataset& data, IndexList indices);

  std::size_t dim() const override { return model_.param_count(); }
  std::size_t size() const override { return subset_ ? indices_.size() : data_.size(); }
  double component_value(const Vec& w, std::size_t j) const override;
  double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const override;

  std::size_t sample_index(std::size_t j) const { return subset_ ? indices_[j] : j; }

 private:
  ModelSpec model_;
  const Dataset& data_;
  IndexList indices_;
  bool subset_ = false;
};

/// Adds (1 / 2 gamma) ||w - anchor||^2 to every component of `base`, so
/// total() = sum_j phi_j(w) + size * ||w - anchor||^2 / (2 gamma).
/// gamma = +inf leaves the base objective untouched.
class ProximalObjective final : public FiniteSumObjective {
 public:
  ProximalObjective(const FiniteSumObjective& base, Vec anchor, double gamma);

  std::size_t dim() const override { return base_.dim(); }
  std::size_t size() const override { return base_.size(); }
  double component_value(const Vec& w, std::size_t j) const override;
  double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const override;
  double total(const Vec& w) const override;

  const Vec& anchor() const { return anchor_; }
  double gamma() const { return gamma_; }

 private:
  double proximal_term(const Vec& w) const;

  const FiniteSumObjective& base_;
  Vec anchor_;
  double gamma_;
};

/// c * phi for a constant c > 0.
class ScaledObjective final : public FiniteSumObjective {
 public:
  ScaledObjective(const FiniteSumObjective& base, double scale);

  std::size_t dim() const override { return base_.dim(); }
  std::size_t size() const override { return base_.size(); }
  double component_value(const Vec& w, std::size_t j) const override;
  double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const override;
  double total(const Vec& w) const override;

 private:
  const FiniteSumObjective& base_;
  double scale_;
};

/// phi + psi, components of phi first. Both must share the dimension.
class SumObjective final : public FiniteSumObjective {
 public:
  SumObjective(const FiniteSumObjective& first, const FiniteSumObjective& second);

  std::size_t dim() const override { return first_.dim(); }
  std::size_t size() const override { return first_.size() + second_.size(); }
  double component_value(const Vec& w, std::size_t j) const override;
  double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const override;
  double total(const Vec& w) const override;

 private:
  const FiniteSumObjective& first_;
  const FiniteSumObjective& second_;
};

/// Single-component objective from a value and a gradient callable.
class FunctionObjective final : public FiniteSumObjective {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  FunctionObjective(std::size_t dim, ValueFn value, GradFn grad);

  std::size_t dim() const override { return dim_; }
  std::size_t size() const override { return 1; }
  double component_value(const Vec& w, std::size_t j) const override;
  double accumulate_component(const Vec& w, std::size_t j, Vec& grad) const override;

  /// 1/2 ||w - c||^2 scaled by `curvature`.
  static FunctionObjective quadratic(Vec center, double curvature = 1.0);
  static FunctionObjective constant(std::size_t dim, double value);

 private:
  std::size_t dim_;
  ValueFn value_;
  GradFn grad_;
};

}  // namespace adass
