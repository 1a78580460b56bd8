#include "prevcorr/marginal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prevcorr {

Vec corrective_weights(const WeightPolicy& policy, const LabelDist& target_dist,
                       const std::vector<int>& labels, int n_labels) {
  target_dist.validate();
  if (target_dist.size() != n_labels)
    throw std::invalid_argument("corrective_weights: target size mismatch");
  const int n = static_cast<int>(labels.size());
  if (n < 1) throw std::invalid_argument("corrective_weights: empty batch");

  Vec per_label(n_labels);
  if (policy.kind == WeightKind::Expected) {
    policy.expected_dist.validate();
    if (policy.expected_dist.size() != n_labels)
      throw std::invalid_argument("corrective_weights: expected_dist size mismatch");
    for (int k = 0; k < n_labels; ++k) {
      if (policy.expected_dist.p[k] <= 0.0)
        throw std::invalid_argument(
            "corrective_weights: expected distribution has zero mass for label " +
            std::to_string(k));
      per_label[k] = target_dist.p[k] / policy.expected_dist.p[k];
    }
  } else {
    std::vector<int> counts(static_cast<std::size_t>(n_labels), 0);
    for (int label : labels) {
      if (label < 0 || label >= n_labels)
        throw std::invalid_argument("corrective_weights: label out of range");
      ++counts[static_cast<std::size_t>(label)];
    }
    for (int k = 0; k < n_labels; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0)
        throw std::invalid_argument(
            "corrective_weights: empirical policy requires every class in the "
            "batch; label " + std::to_string(k) + " is missing");
      per_label[k] = static_cast<double>(n) /
                     counts[static_cast<std::size_t>(k)] * target_dist.p[k];
    }
  }

  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = per_label[labels[static_cast<std::size_t>(i)]];
  return out;
}

MarginalEstimate marginal_estimate(const Mat& loglik,
                                   const std::vector<int>& labels,
                                   const Vec& weights) {
  const Eigen::Index n = loglik.rows();
  if (n < 1) throw std::invalid_argument("marginal_estimate: empty batch");
  if (static_cast<Eigen::Index>(labels.size()) != n || weights.size() != n)
    throw std::invalid_argument("marginal_estimate: row count mismatch");
  if (!all_finite(loglik) || !all_finite(weights))
    throw std::invalid_argument("marginal_estimate: non-finite input");

  MarginalEstimate est;
  est.weights = weights;
  est.gamma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] < 0.0)
      throw std::invalid_argument("marginal_estimate: negative weight");
    est.gamma[i] = std::log(weights[i] / static_cast<double>(n));
  }
  const Eigen::Index k = loglik.cols();
  est.log_phat.resize(k);
  Vec terms(n);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) terms[i] = est.gamma[i] + loglik(i, c);
    est.log_phat[c] = logsumexp(terms);
  }
  return est;
}

void FinitePopulation::validate() const {
  if (x.rows() != px.size())
    throw std::invalid_argument("FinitePopulation: point/probability mismatch");
  if (x.rows() < 1) throw std::invalid_argument("FinitePopulation: empty support");
  if ((px.array() < 0.0).any() || std::abs(px.sum() - 1.0) > 1e-9)
    throw std::invalid_argument(
        "FinitePopulation: probabilities must be >= 0 and sum to 1");
}

Vec log_exact_marginal(const ModelSpec& spec, const Vec& w,
                       const FinitePopulation& pop) {
  pop.validate();
  const Eigen::Index m = pop.x.rows();
  const int k = spec.n_labels();
  Mat terms(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double lp = pop.px[i] > 0.0 ? std::log(pop.px[i]) : neg_inf();
    terms.row(i) =
        (log_lik(spec, w, pop.x.row(i).transpose()).array() + lp).transpose();
  }
  Vec out(k);
  for (int c = 0; c < k; ++c) out[c] = logsumexp(terms.col(c));
  return out;
}

LabelDist exact_marginal(const ModelSpec& spec, const Vec& w,
                         const FinitePopulation& pop) {
  return LabelDist(log_exact_marginal(spec, w, pop).array().exp().matrix());
}

Vec marginal_gradient_scale(const MarginalEstimate& est, const Vec& log_q) {
  if (log_q.size() != est.log_phat.size())
    throw std::invalid_argument("marginal_gradient_scale: size mismatch");
  return (est.log_phat - log_q).array().exp().matrix();
}

Mat marginal_backward(const MarginalEstimate& est, const Mat& loglik,
                      const Vec& upstream) {
  const Eigen::Index n = loglik.rows();
  const Eigen::Index k = loglik.cols();
  if (est.gamma.size() != n || est.log_phat.size() != k ||
      upstream.size() != k)
    throw std::invalid_argument("marginal_backward: shape mismatch");
  Mat g(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      g(i, c) =
          upstream[c] * std::exp(est.gamma[i] + loglik(i, c) - est.log_phat[c]);
  return g;
}

}  // namespace prevcorr
