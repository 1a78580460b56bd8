#include "prevcorr/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prevcorr {

namespace {

void check_dims(const ModelSpec& spec, const Vec& w, Eigen::Index x_dim) {
  if (x_dim != spec.input_dim)
    throw std::invalid_argument("model: input has dimension " +
                                std::to_string(x_dim) + ", expected " +
                                std::to_string(spec.input_dim));
  if (w.size() != param_count(spec))
    throw std::invalid_argument("model: parameter vector has dimension " +
                                std::to_string(w.size()) + ", expected " +
                                std::to_string(param_count(spec)));
}

Vec log_softmax(const Vec& z) {
  return (z.array() - logsumexp(z)).matrix();
}

double activate(Activation a, double v) {
  return a == Activation::Tanh ? std::tanh(v) : std::max(0.0, v);
}

double activate_grad(Activation a, double v) {
  if (a == Activation::Tanh) {
    const double t = std::tanh(v);
    return 1.0 - t * t;
  }
  return v > 0.0 ? 1.0 : 0.0;
}

struct MlpLayout {
  int d, h, k;
  int w1() const { return 0; }
  int b1() const { return h * d; }
  int w2() const { return h * d + h; }
  int b2() const { return h * d + h + k * h; }
};

MlpLayout layout(const ModelSpec& spec) {
  return {spec.input_dim, spec.hidden_dim, spec.n_labels()};
}

// forward returning pre-activations as well, for the backward pass
struct MlpForward {
  Vec z1, a1, z2;
};

MlpForward mlp_forward(const ModelSpec& spec, const Vec& w, const Vec& x) {
  const MlpLayout L = layout(spec);
  MlpForward f;
  f.z1.resize(L.h);
  for (int j = 0; j < L.h; ++j) {
    double s = w[L.b1() + j];
    for (int i = 0; i < L.d; ++i) s += w[L.w1() + j * L.d + i] * x[i];
    f.z1[j] = s;
  }
  f.a1.resize(L.h);
  for (int j = 0; j < L.h; ++j) f.a1[j] = activate(spec.activation, f.z1[j]);
  f.z2.resize(L.k);
  for (int c = 0; c < L.k; ++c) {
    double s = w[L.b2() + c];
    for (int j = 0; j < L.h; ++j) s += w[L.w2() + c * L.h + j] * f.a1[j];
    f.z2[c] = s;
  }
  return f;
}

}  // namespace

void ModelSpec::validate() const {
  labels.validate();
  if (input_dim < 1) throw std::invalid_argument("model: input_dim must be >= 1");
  switch (kind) {
    case ModelKind::LogisticBinary:
      if (labels.size != 2)
        throw std::invalid_argument("model: LogisticBinary requires 2 labels");
      break;
    case ModelKind::LogisticMultinomial:
      break;
    case ModelKind::MlpOneHidden:
      if (hidden_dim < 1)
        throw std::invalid_argument("model: MlpOneHidden requires hidden_dim >= 1");
      break;
  }
}

int param_count(const ModelSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ModelKind::LogisticBinary:
      return spec.input_dim + 1;
    case ModelKind::LogisticMultinomial:
      return spec.n_labels() * (spec.input_dim + 1);
    case ModelKind::MlpOneHidden: {
      const MlpLayout L = layout(spec);
      return L.h * L.d + L.h + L.k * L.h + L.k;
    }
  }
  throw std::logic_error("model: unknown kind");
}

Vec log_lik(const ModelSpec& spec, const Vec& w, const Vec& x) {
  check_dims(spec, w, x.size());
  switch (spec.kind) {
    case ModelKind::LogisticBinary: {
      const double z = w.head(spec.input_dim).dot(x) + w[spec.input_dim];
      Vec out(2);
      out[0] = log_sigmoid(-z);
      out[1] = log_sigmoid(z);
      return out;
    }
    case ModelKind::LogisticMultinomial: {
      const int k = spec.n_labels();
      const int d = spec.input_dim;
      Vec z(k);
      for (int c = 0; c < k; ++c)
        z[c] = w.segment(c * d, d).dot(x) + w[k * d + c];
      return log_softmax(z);
    }
    case ModelKind::MlpOneHidden:
      return log_softmax(mlp_forward(spec, w, x).z2);
  }
  throw std::logic_error("model: unknown kind");
}

Mat log_lik_batch(const ModelSpec& spec, const Vec& w, const Mat& x) {
  if (x.rows() < 1) throw std::invalid_argument("model: empty batch");
  Mat out(x.rows(), spec.n_labels());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = log_lik(spec, w, x.row(i).transpose()).transpose();
  return out;
}

Vec loglik_backward(const ModelSpec& spec, const Vec& w, const Vec& x,
                    const Vec& g) {
  check_dims(spec, w, x.size());
  if (g.size() != spec.n_labels())
    throw std::invalid_argument("model: gradient size must match label count");
  Vec grad = Vec::Zero(w.size());
  switch (spec.kind) {
    case ModelKind::LogisticBinary: {
      const int d = spec.input_dim;
      const double z = w.head(d).dot(x) + w[d];
      const double p1 = std::exp(log_sigmoid(z));
      // d log p(1)/dz = 1-p1, d log p(0)/dz = -p1
      const double dz = g[1] * (1.0 - p1) - g[0] * p1;
      grad.head(d) = dz * x;
      grad[d] = dz;
      return grad;
    }
    case ModelKind::LogisticMultinomial: {
      const int k = spec.n_labels();
      const int d = spec.input_dim;
      const Vec f = log_lik(spec, w, x);
      const Vec p = f.array().exp().matrix();
      const double gsum = g.sum();
      for (int c = 0; c < k; ++c) {
        const double dz = g[c] - p[c] * gsum;  // log-softmax backward
        grad.segment(c * d, d) = dz * x;
        grad[k * d + c] = dz;
      }
      return grad;
    }
    case ModelKind::MlpOneHidden: {
      const MlpLayout L = layout(spec);
      const MlpForward f = mlp_forward(spec, w, x);
      const Vec p = log_softmax(f.z2).array().exp().matrix();
      const double gsum = g.sum();
      Vec dz2(L.k);
      for (int c = 0; c < L.k; ++c) dz2[c] = g[c] - p[c] * gsum;
      Vec da1 = Vec::Zero(L.h);
      for (int c = 0; c < L.k; ++c) {
        for (int j = 0; j < L.h; ++j) {
          grad[L.w2() + c * L.h + j] = dz2[c] * f.a1[j];
          da1[j] += dz2[c] * w[L.w2() + c * L.h + j];
        }
        grad[L.b2() + c] = dz2[c];
      }
      for (int j = 0; j < L.h; ++j) {
        const double dz1 = da1[j] * activate_grad(spec.activation, f.z1[j]);
        for (int i = 0; i < L.d; ++i) grad[L.w1() + j * L.d + i] = dz1 * x[i];
        grad[L.b1() + j] = dz1;
      }
      return grad;
    }
  }
  throw std::logic_error("model: unknown kind");
}

Vec grad_log_lik(const ModelSpec& spec, const Vec& w, const Vec& x, int y) {
  if (y < 0 || y >= spec.n_labels())
    throw std::invalid_argument("model: label out of range");
  Vec g = Vec::Zero(spec.n_labels());
  g[y] = 1.0;
  return loglik_backward(spec, w, x, g);
}

Vec loglik_backward_batch(const ModelSpec& spec, const Vec& w, const Mat& x,
                          const Mat& g) {
  if (x.rows() != g.rows())
    throw std::invalid_argument("model: batch gradient row mismatch");
  Vec grad = Vec::Zero(w.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    grad += loglik_backward(spec, w, x.row(i).transpose(),
                            g.row(i).transpose());
  return grad;
}

Vec init_params(const ModelSpec& spec, RngStream& rng) {
  const int n = param_count(spec);
  if (spec.kind != ModelKind::MlpOneHidden) return Vec::Zero(n);
  const MlpLayout L = layout(spec);
  Vec w(n);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(L.d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(L.h));
  for (int i = 0; i < L.h * L.d + L.h; ++i)
    w[i] = (2.0 * rng.uniform() - 1.0) * s1;
  for (int i = L.w2(); i < n; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * s2;
  return w;
}

std::pair<double, double> group_logits_from_params(const Vec& w) {
  if (w.size() != 2)
    throw std::invalid_argument("group logits: expected 2 parameters");
  return {w[1], w[1] + w[0]};  // (bias, bias + slope)
}

Vec params_from_group_logits(double logit0, double logit1) {
  Vec w(2);
  w[0] = logit1 - logit0;  // slope
  w[1] = logit0;           // bias
  return w;
}

}  // namespace prevcorr
