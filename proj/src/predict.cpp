#include "prevcorr/predict.hpp"

#include <cmath>
#include <stdexcept>

#include "prevcorr/numeric.hpp"

namespace prevcorr {

LabelDist predict_population(const Vec& loglik_row) {
  if (!all_finite(loglik_row) && !(loglik_row.array() <= 0.0).all())
    throw std::invalid_argument("predict: invalid log-likelihood row");
  return LabelDist(loglik_row.array().exp().matrix());
}

LabelDist predict_selection_known(const Vec& loglik_row,
                                  const Vec& log_marginal,
                                  const LabelDist& p_tilde) {
  const Eigen::Index k = loglik_row.size();
  if (log_marginal.size() != k || p_tilde.size() != k)
    throw std::invalid_argument("predict: size mismatch");
  p_tilde.validate();
  if (!p_tilde.strictly_positive())
    throw std::invalid_argument("predict: test label distribution must be positive");
  Vec log_num(k);
  for (Eigen::Index y = 0; y < k; ++y)
    log_num[y] = loglik_row[y] - log_marginal[y] + std::log(p_tilde.p[y]);
  const double z = logsumexp(log_num);
  if (!std::isfinite(z))
    throw std::runtime_error("predict: selection rule normalizer vanished");
  return LabelDist((log_num.array() - z).exp().matrix());
}

namespace {

double log_beta_fn(const Vec& alpha) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) s += std::lgamma(alpha[i]);
  return s - std::lgamma(alpha.sum());
}

// Evidence bound of the mean-field factorization, up to terms constant
// in (q, alpha).
double evidence_bound(const Mat& ratio_log, const Mat& q, const Vec& alpha,
                      const Vec& alpha0) {
  const Eigen::Index n = q.rows();
  const Eigen::Index k = q.cols();
  Vec elog(k);
  const double dg_total = digamma(alpha.sum());
  for (Eigen::Index y = 0; y < k; ++y) elog[y] = digamma(alpha[y]) - dg_total;

  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index y = 0; y < k; ++y) {
      const double qv = q(i, y);
      if (qv > 0.0) f += qv * (ratio_log(i, y) + elog[y] - std::log(qv));
    }
  }
  f += (alpha0 - alpha).dot(elog) + log_beta_fn(alpha) - log_beta_fn(alpha0);
  return f;
}

}  // namespace

DirichletState infer_unknown_prevalence(const Mat& loglik,
                                        const Vec& log_marginal,
                                        const Vec& alpha0,
                                        const UnknownPrevalenceOptions& opts) {
  const Eigen::Index n = loglik.rows();
  const Eigen::Index k = loglik.cols();
  if (n < 1) throw std::invalid_argument("unknown prevalence: empty test set");
  if (log_marginal.size() != k || alpha0.size() != k)
    throw std::invalid_argument("unknown prevalence: size mismatch");
  if ((alpha0.array() <= 0.0).any())
    throw std::invalid_argument("unknown prevalence: pseudo-counts must be > 0");

  Mat ratio_log(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    ratio_log.row(i) = (loglik.row(i) - log_marginal.transpose());

  DirichletState st;
  st.q.resize(n, k);
  // start from the likelihood ratios tilted by the prior mean
  const Vec log_pi0 = (alpha0.array() / alpha0.sum()).log().matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec row = ratio_log.row(i).transpose() + log_pi0;
    st.q.row(i) = (row.array() - logsumexp(row)).exp().transpose();
  }
  st.alpha = alpha0 + st.q.colwise().sum().transpose();

  for (int it = 0; it < opts.max_iters; ++it) {
    st.iterations = it + 1;
    // responsibilities given the current pseudo-counts
    Vec elog(k);
    const double dg_total = digamma(st.alpha.sum());
    for (Eigen::Index y = 0; y < k; ++y)
      elog[y] = digamma(st.alpha[y]) - dg_total;
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec row = ratio_log.row(i).transpose() + elog;
      st.q.row(i) = (row.array() - logsumexp(row)).exp().transpose();
    }
    // pseudo-count refresh
    const Vec alpha_new = alpha0 + st.q.colwise().sum().transpose();
    const double delta = (alpha_new - st.alpha).cwiseAbs().maxCoeff();
    st.alpha = alpha_new;
    st.objective_trace.push_back(
        evidence_bound(ratio_log, st.q, st.alpha, alpha0));
    if (delta < opts.tol) {
      st.converged = true;
      break;
    }
  }
  return st;
}

Vec marginal_matched_alpha0(const LabelDist& marginal, double k) {
  marginal.validate();
  if (!marginal.strictly_positive())
    throw std::invalid_argument("alpha0: marginal must be strictly positive");
  if (k <= 0.0) throw std::invalid_argument("alpha0: k must be positive");
  return (k / marginal.p.minCoeff()) * marginal.p;
}

int decide(const LabelDist& posterior, const Mat& cost) {
  posterior.validate();
  if (cost.cols() != posterior.size())
    throw std::invalid_argument("decide: cost matrix column mismatch");
  if (cost.rows() < 1 || !all_finite(cost))
    throw std::invalid_argument("decide: invalid cost matrix");
  int best = 0;
  double best_risk = cost.row(0).dot(posterior.p);
  for (Eigen::Index a = 1; a < cost.rows(); ++a) {
    const double risk = cost.row(a).dot(posterior.p);
    if (risk < best_risk) {
      best_risk = risk;
      best = static_cast<int>(a);
    }
  }
  return best;
}

}  // namespace prevcorr
