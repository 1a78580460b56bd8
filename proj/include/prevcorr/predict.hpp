#pragma once

#include <vector>

#include "prevcorr/types.hpp"

namespace prevcorr {

// Bias-free rule: the exponentiated log-likelihood row.
LabelDist predict_population(const Vec& loglik_row);

// Selection-aware rule for a known test-time label distribution:
// normalize p(y|x,w) / p(y|w) * p_tilde(y) over labels. Invariant to a
// constant rescaling of the marginal.
LabelDist predict_selection_known(const Vec& loglik_row,
                                  const Vec& log_marginal,
                                  const LabelDist& p_tilde);

// Mean-field state for the unknown-prevalence rule: a Dirichlet over
// the hidden label distribution plus per-point responsibilities.
struct DirichletState {
  Vec alpha;
  Mat q;  // n x |Y|, rows sum to 1
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // evidence bound, non-decreasing
};

struct UnknownPrevalenceOptions {
  int max_iters = 500;
  double tol = 1e-8;  // on the largest change of a pseudo-count
};

// Joint inference of hidden test prevalence and per-point labels:
// alternates
//   q_n(y) ∝ [p(y|x_n,w)/p(y|w)] * exp(digamma(alpha_y) - digamma(sum)),
//   alpha_y = alpha0_y + sum_n q_n(y),
// until the pseudo-counts stabilize. The final responsibilities are the
// per-point predictions.
DirichletState infer_unknown_prevalence(const Mat& loglik,
                                        const Vec& log_marginal,
                                        const Vec& alpha0,
                                        const UnknownPrevalenceOptions& opts = {});

// Dirichlet pseudo-counts proportional to the model marginal, scaled so
// the smallest equals k: a prior that starts the iteration at the
// population rule and lets the data move it.
Vec marginal_matched_alpha0(const LabelDist& marginal, double k);

// Minimum expected cost action: argmin_a sum_y cost(a, y) posterior(y).
// Ties break to the lowest action index. For a binary 0/1 cost this is
// the argmax label.
int decide(const LabelDist& posterior, const Mat& cost);

}  // namespace prevcorr
