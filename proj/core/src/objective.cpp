#include "adass/objective.hpp"

#include <stdexcept>

namespace adass {

double FiniteSumObjective::total(const Vec& w) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < size(); ++j) sum += component_value(w, j);
  return sum;
}

double FiniteSumObjective::mean(const Vec& w) const { return total(w) / static_cast<double>(size()); }

double FiniteSumObjective::batch_gradient(const Vec& w, std::span<const std::size_t> batch, Vec& grad) const {
  grad.setZero(w.size());
  double value = 0.0;
  for (std::size_t j : batch) value += accumulate_component(w, j, grad);
  const double m = static_cast<double>(batch.size());
  grad /= m;
  return value / m;
}

Vec FiniteSumObjective::total_gradient(const Vec& w) const {
  Vec grad = Vec::Zero(w.size());
  for (std::size_t j = 0; j < size(); ++j) accumulate_component(w, j, grad);
  return grad;
}

DatasetObjective::DatasetObjective(const ModelSpec& model, const Dataset& data) : model_(model), data_(data) {
  model_.check_compatible(data_);
}

DatasetObjective::DatasetObjective(const ModelSpec& model, const Dataset& data, IndexList indices)
    : model_(model), data_(data), indices_(std::move(indices)), subset_(true) {
  model_.check_compatible(data_);
  for (std::size_t i : indices_) {
    if (i >= data_.size()) throw std::out_of_range("objective subset index out of range");
  }
}

double DatasetObjective::component_value(const Vec& w, std::size_t j) const {
  return per_sample_loss(model_, w, data_, sample_index(j));
}

double DatasetObjective::accumulate_component(const Vec& w, std::size_t j, Vec& grad) const {
  return accumulate_sample(model_, w, data_, sample_index(j), grad);
}

ProximalObjective::ProximalObjective(const FiniteSumObjective& base, Vec anchor, double gamma)
    : base_(base), anchor_(std::move(anchor)), gamma_(gamma) {
  if (!(gamma_ > 0.0)) throw std::invalid_argument("proximal weight gamma must be > 0");
  if (static_cast<std::size_t>(anchor_.size()) != base_.dim()) {
    throw std::invalid_argument("proximal anchor dimension mismatch");
  }
}

double ProximalObjective::proximal_term(const Vec& w) const {
  if (gamma_ == kInfinity) return 0.0;
  return (w - anchor_).squaredNorm() / (2.0 * gamma_);
}

double ProximalObjective::component_value(const Vec& w, std::size_t j) const {
  return base_.component_value(w, j) + proximal_term(w);
}

double ProximalObjective::accumulate_component(const Vec& w, std::size_t j, Vec& grad) const {
  const double value = base_.accumulate_component(w, j, grad);
  if (gamma_ == kInfinity) return value;
  grad += (w - anchor_) / gamma_;
  return value + proximal_term(w);
}

double ProximalObjective::total(const Vec& w) const {
  return base_.total(w) + static_cast<double>(size()) * proximal_term(w);
}

ScaledObjective::ScaledObjective(const FiniteSumObjective& base, double scale) : base_(base), scale_(scale) {
  if (!(scale_ > 0.0)) throw std::invalid_argument("objective scale must be > 0");
}

double ScaledObjective::component_value(const Vec& w, std::size_t j) const {
  return scale_ * base_.component_value(w, j);
}

double ScaledObjective::accumulate_component(const Vec& w, std::size_t j, Vec& grad) const {
  Vec local = Vec::Zero(w.size());
  const double value = base_.accumulate_component(w, j, local);
  grad += scale_ * local;
  return scale_ * value;
}

double ScaledObjective::total(const Vec& w) const { return scale_ * base_.total(w); }

SumObjective::SumObjective(const FiniteSumObjective& first, const FiniteSumObjective& second)
    : first_(first), second_(second) {
  if (first_.dim() != second_.dim()) throw std::invalid_argument("summed objectives differ in dimension");
}

double SumObjective::component_value(const Vec& w, std::size_t j) const {
  return j < first_.size() ? first_.component_value(w, j) : second_.component_value(w, j - first_.size());
}

double SumObjective::accumulate_component(const Vec& w, std::size_t j, Vec& grad) const {
  return j < first_.size() ? first_.accumulate_component(w, j, grad)
                           : second_.accumulate_component(w, j - first_.size(), grad);
}

double SumObjective::total(const Vec& w) const { return first_.total(w) + second_.total(w); }

FunctionObjective::FunctionObjective(std::size_t dim, ValueFn value, GradFn grad)
    : dim_(dim), value_(std::move(value)), grad_(std::move(grad)) {}

double FunctionObjective::component_value(const Vec& w, std::size_t) const { return value_(w); }

double FunctionObjective::accumulate_component(const Vec& w, std::size_t, Vec& grad) const {
  grad += grad_(w);
  return value_(w);
}

FunctionObjective FunctionObjective::quadratic(Vec center, double curvature) {
  const auto dim = static_cast<std::size_t>(center.size());
  return FunctionObjective(
      dim, [center, curvature](const Vec& w) { return 0.5 * curvature * (w - center).squaredNorm(); },
      [center, curvature](const Vec& w) -> Vec { return curvature * (w - center); });
}

FunctionObjective FunctionObjective::constant(std::size_t dim, double value) {
  return FunctionObjective(
      dim, [value](const Vec&) { return value; }, [dim](const Vec&) -> Vec {
        return Vec::Zero(static_cast<Eigen::Index>(dim));
      });
}

}  // namespace adass
