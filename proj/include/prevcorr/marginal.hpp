#pragma once

#include <vector>

#include "prevcorr/model.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

// How per-sample corrective weights are formed. Expected uses the
// designed label distribution of the minibatch; Empirical uses the
// actual label counts (defined only when every class is present).
enum class WeightKind { Expected, Empirical };

struct WeightPolicy {
  WeightKind kind = WeightKind::Empirical;
  LabelDist expected_dist;  // Expected kind only
};

// Per-sample corrective weights making minibatch averages unbiased for
// expectations under target_dist:
//   Expected:  weight(y) = target(y) / expected(y)
//   Empirical: weight(y) = n_B / n_B(y) * target(y)
// Throws when the empirical policy meets a class absent from the batch,
// naming the missing label.
Vec corrective_weights(const WeightPolicy& policy, const LabelDist& target_dist,
                       const std::vector<int>& labels, int n_labels);

// Minibatch estimate of the model marginal, held in log space.
struct MarginalEstimate {
  Vec log_phat;  // per label: log of the weighted likelihood average
  Vec weights;   // per sample, as passed in
  Vec gamma;     // per sample: log(weight / n_B)
};

// log_phat(y') = logsumexp_n( gamma_n + loglik(n, y') ).
MarginalEstimate marginal_estimate(const Mat& loglik,
                                   const std::vector<int>& labels,
                                   const Vec& weights);

// Finite input population with explicit point probabilities; makes the
// marginal integral exactly computable by enumeration.
struct FinitePopulation {
  Mat x;   // m x d support points
  Vec px;  // m probabilities, summing to 1

  void validate() const;
};

// log p(y|w) = logsumexp_i( log px_i + log p(y|x_i,w) )
Vec log_exact_marginal(const ModelSpec& spec, const Vec& w,
                       const FinitePopulation& pop);
LabelDist exact_marginal(const ModelSpec& spec, const Vec& w,
                         const FinitePopulation& pop);

// Per-label correction factor exp(log_phat - log_q) applied to the
// incoming gradient on each log-marginal before it is routed through
// the estimate (the forward pass reports log_q as the value; the
// backward multiplies by this scale and differentiates log_phat).
Vec marginal_gradient_scale(const MarginalEstimate& est, const Vec& log_q);

// Backward through the marginal estimate: for an upstream gradient
// c(y') on each log_phat(y'), returns the n x |Y| gradient on the
// log-likelihood entries,
//   d/d loglik(n,y') [ sum_y c(y) log_phat(y) ]
//     = c(y') * exp(gamma_n + loglik(n,y') - log_phat(y')).
Mat marginal_backward(const MarginalEstimate& est, const Mat& loglik,
                      const Vec& upstream);

}  // namespace prevcorr
