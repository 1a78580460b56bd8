#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace prevcorr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// log(sum_i exp(v_i)), stable against overflow. Returns -inf for an
// all -inf input.
double logsumexp(const Vec& v);

// log(exp(a) + exp(b))
double logaddexp(double a, double b);

// log(sigmoid(z)) = -log1p(exp(-z)), stable for |z| large.
double log_sigmoid(double z);

// Digamma (derivative of log-gamma) for x > 0.
// Recurrence shifts the argument above 10, then a truncated asymptotic
// series in 1/x^2. Absolute error below 1e-12 for x >= 1e-6.
double digamma(double x);

// Kahan-style pairwise sum; used where accumulation order must not
// perturb results across chunked evaluation.
double pairwise_sum(const Vec& v);

// Runs fn(i) for i in [0, n). Thread count is capped by the
// PREVCORR_THREADS environment variable (default: hardware concurrency).
// fn must only write to per-index state; results are identical to the
// sequential order.
void parallel_for(long n, const std::function<void(long)>& fn);

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }
inline double neg_inf() { return -std::numeric_limits<double>::infinity(); }

}  // namespace prevcorr
