#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "prevcorr/aux_model.hpp"
#include "prevcorr/marginal.hpp"
#include "prevcorr/model.hpp"
#include "prevcorr/optim.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

// Parameter prior. Gaussian is the default; the heavy-tailed Student-t
// variant (density up to a constant) is kept for scale-invariant logit
// priors.
enum class PriorKind { Gaussian, StudentT };

struct PriorSpec {
  PriorKind kind = PriorKind::Gaussian;
  double lambda = 1e-3;  // Gaussian precision
  double nu = 0.002;     // Student-t degrees of freedom
};

double prior_neg_log_density(const PriorSpec& prior, const Vec& w);
Vec prior_grad(const PriorSpec& prior, const Vec& w);

enum class LossKind { Nll, Iw, Ig };

struct LossConfig {
  LossKind kind = LossKind::Nll;
  PriorSpec prior;
  LabelDist true_prevalence;       // required by Iw and Ig
  double prevalence_prior_n = 0.0;  // pseudo-observation count
  LabelDist prevalence_prior_dist;  // target marginal of the prior term

  void validate(int n_labels) const;
};

// Value plus gradient with respect to the log-likelihood entries.
// Parameter gradients are obtained by the caller via
// loglik_backward_batch.
struct LossResult {
  double value = 0.0;
  Mat dloglik;
};

// (N/n_B) sum_n weight_n * (-loglik[n][y_n]). Prior terms are the
// caller's responsibility.
LossResult nll_loss(const Mat& loglik, const std::vector<int>& labels,
                    const Vec& weights, double total_n);

// Importance-weighted log-loss; identical shape with weights built from
// the true prevalence against the apparent one.
LossResult iw_loss(const Mat& loglik, const std::vector<int>& labels,
                   const Vec& weights, double total_n);

// Information-gain loss. Reported value uses log_q as the log-marginal
// (so logged losses are approximate in minibatch mode); the gradient of
// the marginal part is the corrected estimate: the upstream gradient on
// each label's log-marginal is scaled by exp(log_phat - log_q) and
// differentiated through the minibatch estimate. With full_batch set,
// log_q is ignored and both value and gradient use log_phat directly.
LossResult ig_loss(const Mat& loglik, const std::vector<int>& labels,
                   const MarginalEstimate& est, const Vec& log_q,
                   const Vec& weights, double total_n, bool full_batch);

// -n_pr * sum_y p_hat(y) * log-marginal(y); gradient is with respect to
// the log-marginal vector and is routed through the same corrected path
// as the ig marginal term.
std::pair<double, Vec> prevalence_prior_loss(const Vec& marginal_log,
                                             const LabelDist& p_hat,
                                             double n_pr);

enum class BatchScheme { IidUniform, FixedCounts };

struct MinibatchPolicy {
  BatchScheme scheme = BatchScheme::IidUniform;
  int batch_size = 32;
  std::vector<int> counts;  // FixedCounts: per-label, summing to batch_size

  void validate(int n_labels) const;
  // expected label distribution of a batch under this policy
  LabelDist expected_dist(const Dataset& data, int n_labels) const;
};

struct TrainConfig {
  int epochs = 100;
  AdamConfig adam;
  std::uint64_t seed = 0;
  WeightKind weight_kind = WeightKind::Empirical;
  bool full_batch = false;
  // empirical weights with a class missing from the batch: substitute
  // the expected policy for that batch instead of failing
  bool fallback_to_expected = false;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;    // mean reported loss value over the epoch
  double aux_kl = 0.0;  // mean auxiliary loss (Ig only)
  Vec marginal;         // model marginal estimate at epoch end
};

struct TrainResult {
  Vec w;
  bool has_aux = false;
  AuxSpec aux_spec;
  AuxParams aux;
  std::vector<EpochLog> log;
};

// Runs the training loop: per minibatch, forward the main model for
// log-likelihoods, forward the auxiliary model for log-marginals,
// assemble the configured loss with corrective weights, and step both
// parameter sets with Adam. Deterministic given (config, seed).
// Throws on a non-finite loss, naming the offending minibatch.
TrainResult train(const Dataset& data, const ModelSpec& spec,
                  const LossConfig& loss, const MinibatchPolicy& policy,
                  const std::optional<AuxSpec>& aux_spec,
                  const TrainConfig& cfg);

}  // namespace prevcorr
