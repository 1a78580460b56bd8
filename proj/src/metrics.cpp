#include "prevcorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace prevcorr {

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& truth, int n_labels) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(n_labels, n_labels);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= n_labels || p < 0 || p >= n_labels)
      throw std::invalid_argument("confusion: label out of range");
    ++cm.counts(t, p);
  }
  return cm;
}

SummaryStats summary_stats(const ConfusionMatrix& cm) {
  const int k = cm.n_labels();
  const long total = cm.total();
  if (total < 1) throw std::invalid_argument("summary_stats: empty matrix");

  SummaryStats s;
  long diag = 0;
  for (int y = 0; y < k; ++y) diag += cm.counts(y, y);
  s.accuracy = static_cast<double>(diag) / static_cast<double>(total);

  s.true_rates.resize(k);
  s.predictive_values.resize(k);
  for (int y = 0; y < k; ++y) {
    const long row = cm.counts.row(y).cast<long>().sum();
    const long col = cm.counts.col(y).cast<long>().sum();
    s.true_rates[y] =
        row > 0 ? static_cast<double>(cm.counts(y, y)) / row : quiet_nan();
    s.predictive_values[y] =
        col > 0 ? static_cast<double>(cm.counts(y, y)) / col : quiet_nan();
  }
  s.informedness = informedness_from_rates(s.true_rates);
  s.markedness = markedness_from_values(s.predictive_values);
  s.balanced_accuracy = s.true_rates.mean();
  s.mcc = mcc_from(s.informedness, s.markedness);
  return s;
}

double informedness_from_rates(const Vec& true_rates) {
  return true_rates.sum() - 1.0;
}

double markedness_from_values(const Vec& predictive_values) {
  return predictive_values.sum() - 1.0;
}

double mcc_from(double informedness, double markedness) {
  // geometric mean of the two, carrying the sign; NaN when either
  // factor is undefined (or when they disagree in sign outside the
  // binary case)
  return (informedness >= 0.0 ? 1.0 : -1.0) *
         std::sqrt(informedness * markedness);
}

double one_off_accuracy(const std::vector<int>& predicted,
                        const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw std::invalid_argument("one_off_accuracy: bad input");
  long hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (std::abs(predicted[i] - truth[i]) <= 1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::pair<std::vector<CurvePoint>, double> roc_auc(
    const Vec& scores, const std::vector<int>& labels) {
  const Eigen::Index n = scores.size();
  if (n != static_cast<Eigen::Index>(labels.size()) || n < 1)
    throw std::invalid_argument("roc_auc: bad input");
  long pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1)
      throw std::invalid_argument("roc_auc: labels must be binary");
    pos += y;
  }
  const long neg = n - pos;
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[a] > scores[b];
  });

  std::vector<CurvePoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0,
                   quiet_nan()});
  long tp = 0;
  long fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == score) {
      if (labels[static_cast<std::size_t>(order[i])] == 1)
        ++tp;
      else
        ++fp;
      ++i;
    }
    CurvePoint pt;
    pt.threshold = score;
    pt.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    pt.fpr = static_cast<double>(fp) / static_cast<double>(neg);
    pt.informedness = pt.tpr - pt.fpr;
    pt.markedness = quiet_nan();
    curve.push_back(pt);
  }

  double auc = 0.0;
  for (std::size_t j = 1; j < curve.size(); ++j)
    auc += (curve[j].fpr - curve[j - 1].fpr) *
           (curve[j].tpr + curve[j - 1].tpr) / 2.0;
  return {curve, auc};
}

std::vector<CurvePoint> im_curve(std::vector<CurvePoint> curve,
                                 double prevalence) {
  if (prevalence <= 0.0 || prevalence >= 1.0)
    throw std::invalid_argument("im_curve: prevalence must lie in (0,1)");
  for (auto& pt : curve) {
    const double pp = prevalence * pt.tpr + (1.0 - prevalence) * pt.fpr;
    const double pn =
        (1.0 - prevalence) * (1.0 - pt.fpr) + prevalence * (1.0 - pt.tpr);
    const double ppv = pp > 0.0 ? prevalence * pt.tpr / pp : quiet_nan();
    const double npv =
        pn > 0.0 ? (1.0 - prevalence) * (1.0 - pt.fpr) / pn : quiet_nan();
    pt.informedness = pt.tpr - pt.fpr;
    pt.markedness = ppv + npv - 1.0;
  }
  return curve;
}

RiskReport nell_true_population(const Vec& loglik_true, const Vec& weights,
                                double k) {
  const Eigen::Index n = loglik_true.size();
  if (n < 1 || weights.size() != n)
    throw std::invalid_argument("nell: bad input");
  Vec terms = -(weights.array() * loglik_true.array()).matrix();
  RiskReport r;
  r.value = terms.mean();
  if (n > 1) {
    const double var =
        (terms.array() - r.value).square().sum() / static_cast<double>(n - 1);
    r.std_error = std::sqrt(var / static_cast<double>(n));
  }
  r.corrected = r.value + k * r.std_error;
  return r;
}

double holdout_risk(const Mat& predictions, const std::vector<int>& labels) {
  const Eigen::Index n = predictions.rows();
  if (n < 1 || n != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("holdout_risk: bad input");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    acc -= std::log(predictions(i, labels[static_cast<std::size_t>(i)]));
  return acc / static_cast<double>(n);
}

double holdout_ll(const Vec& loglik_true, const Vec& log_marginal_true) {
  const Eigen::Index n = loglik_true.size();
  if (n < 1 || log_marginal_true.size() != n)
    throw std::invalid_argument("holdout_ll: bad input");
  return (loglik_true - log_marginal_true).mean();
}

std::vector<CalibrationBin> calibration_report(const Vec& p_positive,
                                               const std::vector<int>& labels,
                                               const Vec& weights,
                                               const CalibrationConfig& cfg) {
  const Eigen::Index n = p_positive.size();
  if (n < 1 || n != static_cast<Eigen::Index>(labels.size()) ||
      weights.size() != n)
    throw std::invalid_argument("calibration: bad input");
  if (cfg.bins < 2) throw std::invalid_argument("calibration: bins must be >= 2");

  std::vector<CalibrationBin> bins(static_cast<std::size_t>(cfg.bins));
  const double lo = cfg.log_scale ? std::log(cfg.log_floor) : 0.0;
  const double hi = cfg.log_scale ? 0.0 : 1.0;
  const double width = (hi - lo) / cfg.bins;
  for (int b = 0; b < cfg.bins; ++b) {
    const double a = lo + b * width;
    const double z = lo + (b + 1) * width;
    bins[static_cast<std::size_t>(b)].lo = cfg.log_scale ? std::exp(a) : a;
    bins[static_cast<std::size_t>(b)].hi = cfg.log_scale ? std::exp(z) : z;
  }

  std::vector<double> pred_acc(static_cast<std::size_t>(cfg.bins), 0.0);
  std::vector<double> pos_acc(static_cast<std::size_t>(cfg.bins), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = p_positive[i];
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("calibration: probability out of range");
    double coord = cfg.log_scale ? std::log(std::max(p, cfg.log_floor)) : p;
    int b = static_cast<int>(std::floor((coord - lo) / width));
    b = std::clamp(b, 0, cfg.bins - 1);
    auto& bin = bins[static_cast<std::size_t>(b)];
    bin.weight += weights[i];
    bin.count += 1;
    pred_acc[static_cast<std::size_t>(b)] += weights[i] * p;
    if (labels[static_cast<std::size_t>(i)] == 1)
      pos_acc[static_cast<std::size_t>(b)] += weights[i];
  }
  for (int b = 0; b < cfg.bins; ++b) {
    auto& bin = bins[static_cast<std::size_t>(b)];
    if (bin.weight > 0.0) {
      bin.mean_pred = pred_acc[static_cast<std::size_t>(b)] / bin.weight;
      bin.observed = pos_acc[static_cast<std::size_t>(b)] / bin.weight;
    } else {
      bin.mean_pred = quiet_nan();
      bin.observed = quiet_nan();
    }
  }
  return bins;
}

std::vector<FpFnPoint> expected_fp_fn(const Vec& p_positive,
                                      const Vec& thresholds) {
  const Eigen::Index n = p_positive.size();
  if (n < 1) throw std::invalid_argument("expected_fp_fn: empty input");
  const double n0 = (1.0 - p_positive.array()).sum();
  const double n1 = p_positive.sum();
  std::vector<FpFnPoint> out;
  out.reserve(static_cast<std::size_t>(thresholds.size()));
  for (Eigen::Index t = 0; t < thresholds.size(); ++t) {
    FpFnPoint pt;
    pt.threshold = thresholds[t];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p_positive[i] >= pt.threshold)
        pt.fp += 1.0 - p_positive[i];
      else
        pt.fn += p_positive[i];
    }
    pt.fpr = n0 > 0.0 ? pt.fp / n0 : quiet_nan();
    pt.fnr = n1 > 0.0 ? pt.fn / n1 : quiet_nan();
    out.push_back(pt);
  }
  return out;
}

Vec conditional_variance(const Vec& g, const std::vector<int>& labels,
                         int n_labels) {
  const Eigen::Index n = g.size();
  if (n != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("conditional_variance: length mismatch");
  Vec mean = Vec::Zero(n_labels);
  Vec count = Vec::Zero(n_labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean[labels[static_cast<std::size_t>(i)]] += g[i];
    count[labels[static_cast<std::size_t>(i)]] += 1.0;
  }
  for (int y = 0; y < n_labels; ++y) {
    if (count[y] < 2.0)
      throw std::invalid_argument(
          "conditional_variance: label " + std::to_string(y) +
          " needs at least two samples");
    mean[y] /= count[y];
  }
  Vec var = Vec::Zero(n_labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    var[y] += (g[i] - mean[y]) * (g[i] - mean[y]);
  }
  for (int y = 0; y < n_labels; ++y) var[y] /= (count[y] - 1.0);
  return var;
}

double estimator_variance_g2(const Vec& cond_var, const LabelDist& p_y,
                             const std::vector<int>& counts) {
  p_y.validate();
  const int k = p_y.size();
  if (cond_var.size() != k || static_cast<int>(counts.size()) != k)
    throw std::invalid_argument("estimator_variance: size mismatch");
  double variance = 0.0;
  for (int y = 0; y < k; ++y) {
    if (counts[static_cast<std::size_t>(y)] < 1)
      throw std::invalid_argument("estimator_variance: label " +
                                  std::to_string(y) + " has count 0");
    variance += p_y.p[y] * p_y.p[y] /
                static_cast<double>(counts[static_cast<std::size_t>(y)]) *
                cond_var[y];
  }
  return variance;
}

}  // namespace prevcorr
