#include "adass/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "adass/parallel.hpp"

namespace adass {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LeastSquares: return "least-squares";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Mlp: return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "least-squares" || name == "lsq") return ModelKind::LeastSquares;
  if (name == "logistic" || name == "logistic-regression") return ModelKind::Logistic;
  if (name == "mlp" || name == "mlp-1hidden") return ModelKind::Mlp;
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected least-squares, logistic, mlp)");
}

ModelSpec ModelSpec::least_squares(std::size_t d, double l2) {
  return ModelSpec{ModelKind::LeastSquares, d, 0, 0, l2};
}

ModelSpec ModelSpec::logistic(std::size_t d, double l2) { return ModelSpec{ModelKind::Logistic, d, 0, 2, l2}; }

ModelSpec ModelSpec::mlp(std::size_t d, std::size_t hidden, std::size_t num_classes, double l2) {
  return ModelSpec{ModelKind::Mlp, d, hidden, num_classes, l2};
}

std::size_t ModelSpec::output_dim() const {
  if (kind != ModelKind::Mlp) return 1;
  return num_classes == 0 ? 1 : num_classes;
}

std::size_t ModelSpec::param_count() const {
  if (kind != ModelKind::Mlp) return input_dim;
  const std::size_t k = output_dim();
  return hidden * input_dim + hidden + k * hidden + k;
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("model input dimension must be >= 1");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 weight must be finite and >= 0");
  if (kind == ModelKind::Logistic && num_classes != 2) {
    throw std::invalid_argument("logistic model is binary (num_classes = 2)");
  }
  if (kind == ModelKind::Mlp) {
    if (hidden < 1) throw std::invalid_argument("mlp hidden width must be >= 1");
    if (num_classes == 1) throw std::invalid_argument("mlp needs num_classes = 0 (regression) or >= 2");
  }
}

void ModelSpec::check_compatible(const Dataset& data) const {
  validate();
  if (data.dim() != input_dim) {
    throw std::invalid_argument("model expects " + std::to_string(input_dim) + " features, dataset has " +
                                std::to_string(data.dim()));
  }
  if (kind == ModelKind::Logistic && data.num_classes() != 2) {
    throw std::invalid_argument("logistic model needs a two-class dataset");
  }
  if (kind == ModelKind::Mlp && data.num_classes() != num_classes) {
    throw std::invalid_argument("mlp head has " + std::to_string(num_classes) + " classes, dataset has " +
                                std::to_string(data.num_classes()));
  }
}

namespace {

using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Vec>;
using VecMap = Eigen::Map<Vec>;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct MlpLayout {
  Eigen::Index d, h, k;
  Eigen::Index w1() const { return 0; }
  Eigen::Index b1() const { return h * d; }
  Eigen::Index w2() const { return h * d + h; }
  Eigen::Index b2() const { return h * d + h + k * h; }
};

MlpLayout layout_of(const ModelSpec& m) {
  return {static_cast<Eigen::Index>(m.input_dim), static_cast<Eigen::Index>(m.hidden),
          static_cast<Eigen::Index>(m.output_dim())};
}

// Output-layer loss and d loss / d output.
double head_loss(const ModelSpec& model, const Vec& out, const Dataset& data, std::size_t i, Vec* d_out) {
  if (model.num_classes == 0) {
    const double r = out[0] - data.target(i);
    if (d_out) (*d_out)[0] = r;
    return 0.5 * r * r;
  }
  const auto label = static_cast<Eigen::Index>(data.label(i));
  const double peak = out.maxCoeff();
  const Vec shifted = (out.array() - peak).matrix();
  const Vec expo = shifted.array().exp().matrix();
  const double z = expo.sum();
  if (d_out) {
    *d_out = expo / z;
    (*d_out)[label] -= 1.0;
  }
  return std::log(z) - shifted[label];
}

double mlp_sample(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i, Vec* grad) {
  const MlpLayout L = layout_of(model);
  const ConstMatMap w1(w.data() + L.w1(), L.h, L.d);
  const ConstVecMap b1(w.data() + L.b1(), L.h);
  const ConstMatMap w2(w.data() + L.w2(), L.k, L.h);
  const ConstVecMap b2(w.data() + L.b2(), L.k);

  const auto x = data.row(i).transpose();
  const Vec act = (w1 * x + b1).array().tanh().matrix();
  const Vec out = w2 * act + b2;

  if (!grad) return head_loss(model, out, data, i, nullptr);

  Vec d_out(L.k);
  const double loss = head_loss(model, out, data, i, &d_out);
  const Vec d_pre = ((w2.transpose() * d_out).array() * (1.0 - act.array().square())).matrix();

  MatMap(grad->data() + L.w1(), L.h, L.d).noalias() += d_pre * x.transpose();
  VecMap(grad->data() + L.b1(), L.h) += d_pre;
  MatMap(grad->data() + L.w2(), L.k, L.h).noalias() += d_out * act.transpose();
  VecMap(grad->data() + L.b2(), L.k) += d_out;
  return loss;
}

double sample_impl(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i, Vec* grad) {
  double loss = 0.0;
  switch (model.kind) {
    case ModelKind::LeastSquares: {
      const double r = data.target(i) - data.row(i).dot(w);
      loss = 0.5 * r * r;
      if (grad) grad->noalias() -= r * data.row(i).transpose();
      break;
    }
    case ModelKind::Logistic: {
      const double sign = data.target(i) > 0.5 ? 1.0 : -1.0;
      const double margin = sign * data.row(i).dot(w);
      loss = softplus(-margin);
      if (grad) grad->noalias() -= (sign * sigmoid(-margin)) * data.row(i).transpose();
      break;
    }
    case ModelKind::Mlp:
      loss = mlp_sample(model, w, data, i, grad);
      break;
  }
  if (model.l2 > 0.0) {
    loss += 0.5 * model.l2 * w.squaredNorm();
    if (grad) *grad += model.l2 * w;
  }
  return loss;
}

void check_args(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i) {
  if (i >= data.size()) {
    throw std::out_of_range("sample index " + std::to_string(i) + " out of range for n = " +
                            std::to_string(data.size()));
  }
  if (static_cast<std::size_t>(w.size()) != model.param_count()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(w.size()) + " entries, model needs " +
                                std::to_string(model.param_count()));
  }
  if (data.dim() != model.input_dim) {
    throw std::invalid_argument("dataset dimension does not match the model");
  }
}

}  // namespace

SampleEval per_sample_eval(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i) {
  check_args(model, w, data, i);
  SampleEval out{0.0, Vec::Zero(w.size())};
  out.loss = sample_impl(model, w, data, i, &out.grad);
  return out;
}

double per_sample_loss(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i) {
  check_args(model, w, data, i);
  return sample_impl(model, w, data, i, nullptr);
}

double accumulate_sample(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i, Vec& grad) {
  return sample_impl(model, w, data, i, &grad);
}

BatchEval batch_eval(const ModelSpec& model, const Vec& w, const Dataset& data, const IndexList& subset) {
  if (subset.empty()) throw std::invalid_argument("batch_eval needs a non-empty index set");
  BatchEval out{0.0, Vec::Zero(w.size())};
  for (std::size_t i : subset) {
    check_args(model, w, data, i);
    out.loss += sample_impl(model, w, data, i, &out.grad);
  }
  const double m = static_cast<double>(subset.size());
  out.loss /= m;
  out.grad /= m;
  return out;
}

Vec loss_sweep(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t threads) {
  if (data.size() > 0) check_args(model, w, data, 0);
  Vec losses(static_cast<Eigen::Index>(data.size()));
  parallel_for(data.size(), threads, [&](std::size_t i) {
    losses[static_cast<Eigen::Index>(i)] = sample_impl(model, w, data, i, nullptr);
  });
  return losses;
}

double full_loss(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t threads) {
  const Vec losses = loss_sweep(model, w, data, threads);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < losses.size(); ++i) sum += losses[i];
  return sum / static_cast<double>(data.size());
}

Vec predict(const ModelSpec& model, const Vec& w, const Dataset& data, std::size_t i) {
  check_args(model, w, data, i);
  if (model.kind != ModelKind::Mlp) {
    Vec out(1);
    out[0] = data.row(i).dot(w);
    return out;
  }
  const MlpLayout L = layout_of(model);
  const ConstMatMap w1(w.data() + L.w1(), L.h, L.d);
  const ConstVecMap b1(w.data() + L.b1(), L.h);
  const ConstMatMap w2(w.data() + L.w2(), L.k, L.h);
  const ConstVecMap b2(w.data() + L.b2(), L.k);
  const Vec act = (w1 * data.row(i).transpose() + b1).array().tanh().matrix();
  return w2 * act + b2;
}

double accuracy(const ModelSpec& model, const Vec& w, const Dataset& data) {
  if (!data.is_classification()) return std::nan("");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec out = predict(model, w, data, i);
    std::size_t guess = 0;
    if (model.kind == ModelKind::Logistic) {
      guess = out[0] > 0.0 ? 1 : 0;
    } else {
      Eigen::Index arg = 0;
      out.maxCoeff(&arg);
      guess = static_cast<std::size_t>(arg);
    }
    if (guess == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Vec init_params(const ModelSpec& model, std::uint64_t seed) {
  model.validate();
  Vec w = Vec::Zero(static_cast<Eigen::Index>(model.param_count()));
  if (model.kind != ModelKind::Mlp) return w;

  std::mt19937_64 rng(seed);
  const MlpLayout L = layout_of(model);
  std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(static_cast<double>(L.d)));
  std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(static_cast<double>(L.h)));
  for (Eigen::Index j = 0; j < L.h * L.d; ++j) w[L.w1() + j] = first(rng);
  for (Eigen::Index j = 0; j < L.k * L.h; ++j) w[L.w2() + j] = second(rng);
  return w;
}

}  // namespace adass
