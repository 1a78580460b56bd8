#pragma once

#include <vector>

#include "prevcorr/types.hpp"

namespace prevcorr {

// True label along rows, predicted label along columns.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  int n_labels() const { return static_cast<int>(counts.rows()); }
  long total() const { return counts.cast<long>().sum(); }
};

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& truth, int n_labels);

// Scalar summaries. Undefined predictive values (no predictions of a
// class) propagate as NaN, and so do the statistics built from them.
struct SummaryStats {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  Vec true_rates;        // per class: recall of that class
  Vec predictive_values; // per class: precision of that class
  double informedness = 0.0;  // sum of true rates - 1
  double markedness = 0.0;    // sum of predictive values - 1
  double mcc = 0.0;           // signed geometric mean of the two
};

SummaryStats summary_stats(const ConfusionMatrix& cm);

// The scalar identities used by summary_stats, exposed for computing
// the statistics from externally reported rates. NaN inputs propagate.
double informedness_from_rates(const Vec& true_rates);
double markedness_from_values(const Vec& predictive_values);
double mcc_from(double informedness, double markedness);

// One-off accuracy for ordinal label spaces: |predicted - true| <= 1.
double one_off_accuracy(const std::vector<int>& predicted,
                        const std::vector<int>& truth);

struct CurvePoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double informedness = 0.0;  // tpr - fpr, prevalence invariant
  double markedness = 0.0;    // filled by im_curve; may be NaN
};

// ROC curve with thresholds at every distinct score plus sentinels, and
// trapezoid AUC (equals the pairwise comparison statistic with half
// credit for ties). Throws if only one class is present.
std::pair<std::vector<CurvePoint>, double> roc_auc(
    const Vec& scores, const std::vector<int>& labels);

// Fills predictive values along the curve for a hypothetical true
// prevalence of positives; informedness is unchanged.
std::vector<CurvePoint> im_curve(std::vector<CurvePoint> curve,
                                 double prevalence);

// Finite-sample risk estimate with a one-sided concentration margin.
struct RiskReport {
  double value = 0.0;
  double std_error = 0.0;
  double corrected = 0.0;  // value + k * std_error
};

// Negative expected log-likelihood for the true population, estimated
// on a reweighted hold-out: value = -avg_n weight_n * loglik_n.
RiskReport nell_true_population(const Vec& loglik_true, const Vec& weights,
                                double k = 2.0);

// -avg_n log q(y_n) for the evaluation rule's predicted distributions.
double holdout_risk(const Mat& predictions, const std::vector<int>& labels);

// avg_n [ loglik_n - log marginal(y_n) ]: average information gain of
// the model on held-out data.
double holdout_ll(const Vec& loglik_true, const Vec& log_marginal_true);

struct CalibrationBin {
  double lo = 0.0;  // bin edges on the predicted probability
  double hi = 0.0;
  double mean_pred = 0.0;  // weighted mean predicted probability
  double observed = 0.0;   // weighted frequency of real positives
  double weight = 0.0;     // total weight in the bin
  long count = 0;          // raw sample count
};

struct CalibrationConfig {
  int bins = 10;
  bool log_scale = true;    // bin edges equal-width in log-probability
  double log_floor = 1e-6;  // lowest edge when log_scale is set
};

std::vector<CalibrationBin> calibration_report(
    const Vec& p_positive, const std::vector<int>& labels, const Vec& weights,
    const CalibrationConfig& cfg = {});

// Expected false positive / false negative counts and rates implied by
// the predicted probabilities alone, per threshold.
struct FpFnPoint {
  double threshold = 0.0;
  double fp = 0.0;  // sum of (1 - p) over predictions >= threshold
  double fn = 0.0;  // sum of p over predictions < threshold
  double fpr = 0.0;
  double fnr = 0.0;
};

std::vector<FpFnPoint> expected_fp_fn(const Vec& p_positive,
                                      const Vec& thresholds);

// Unbiased per-class sample variance of g given the label (requires at
// least two samples of each class).
Vec conditional_variance(const Vec& g, const std::vector<int>& labels,
                         int n_labels);

// Predicted sampling variance of the weighted minibatch mean under a
// fixed-count design:
//   (1/n_B) sum_y f(y) Var_{x|y}[ g p_Y(y)/f(y) ],  f(y) = count_y/n_B,
// assembled from the per-class conditional variances.
double estimator_variance_g2(const Vec& cond_var, const LabelDist& p_y,
                             const std::vector<int>& counts);

}  // namespace prevcorr
