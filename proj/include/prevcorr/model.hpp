#pragma once

#include <utility>

#include "prevcorr/rng.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

enum class ModelKind { LogisticBinary, LogisticMultinomial, MlpOneHidden };
enum class Activation { Tanh, Relu };

// Parametric likelihood model p(y|x,w). All three kinds share the flat
// parameter-vector interface; gradients are exact and computed by hand.
struct ModelSpec {
  ModelKind kind = ModelKind::LogisticBinary;
  int input_dim = 1;
  int hidden_dim = 0;                     // MlpOneHidden only
  Activation activation = Activation::Tanh;  // MlpOneHidden only
  LabelSpace labels;

  void validate() const;
  int n_labels() const { return labels.size; }
};

// Flat parameter dimension implied by the spec.
// Layouts (row-major matrices):
//   LogisticBinary:      [weights(d), bias]                      -> d+1
//   LogisticMultinomial: [W(|Y| x d), biases(|Y|)]               -> |Y|(d+1)
//   MlpOneHidden:        [W1(h x d), b1(h), W2(|Y| x h), b2(|Y|)]
int param_count(const ModelSpec& spec);

// Log-probability vector over the label set for a single input.
// exp of the result sums to 1 (log-softmax / log-sigmoid, evaluated
// stably).
Vec log_lik(const ModelSpec& spec, const Vec& w, const Vec& x);

// One row per input; row i equals log_lik on row i.
Mat log_lik_batch(const ModelSpec& spec, const Vec& w, const Mat& x);

// Exact gradient of log p(y|x,w) with respect to w.
Vec grad_log_lik(const ModelSpec& spec, const Vec& w, const Vec& x, int y);

// Backward pass: given an incoming gradient g over the log-probability
// outputs, returns sum_y g(y) * d log p(y|x,w) / dw. grad_log_lik is
// the one-hot special case.
Vec loglik_backward(const ModelSpec& spec, const Vec& w, const Vec& x,
                    const Vec& g);

// Accumulates loglik_backward over all rows: G is n x |Y|.
Vec loglik_backward_batch(const ModelSpec& spec, const Vec& w, const Mat& x,
                          const Mat& g);

// Deterministic initialization: zeros for the logistic kinds, uniform
// in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for the MLP.
Vec init_params(const ModelSpec& spec, RngStream& rng);

// Reparametrization for the two-parameter binary model on a 0/1 scalar
// covariate: per-group logits (logit0, logit1) = (bias, bias + slope).
// The log odds ratio of the model equals logit1 - logit0.
std::pair<double, double> group_logits_from_params(const Vec& w);
Vec params_from_group_logits(double logit0, double logit1);

}  // namespace prevcorr
