#include "prevcorr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace prevcorr {

double prior_neg_log_density(const PriorSpec& prior, const Vec& w) {
  if (prior.kind == PriorKind::Gaussian)
    return 0.5 * prior.lambda * w.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    s += 0.5 * (prior.nu + 1.0) * std::log1p(w[i] * w[i] / prior.nu);
  return s;
}

Vec prior_grad(const PriorSpec& prior, const Vec& w) {
  if (prior.kind == PriorKind::Gaussian) return prior.lambda * w;
  Vec g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    g[i] = (prior.nu + 1.0) * w[i] / (prior.nu + w[i] * w[i]);
  return g;
}

void LossConfig::validate(int n_labels) const {
  if (kind != LossKind::Nll) {
    true_prevalence.validate();
    if (true_prevalence.size() != n_labels)
      throw std::invalid_argument("loss: true prevalence size mismatch");
    if (!true_prevalence.strictly_positive())
      throw std::invalid_argument("loss: true prevalence must be positive");
  }
  if (prevalence_prior_n < 0.0)
    throw std::invalid_argument("loss: prevalence prior count must be >= 0");
  if (prevalence_prior_n > 0.0) {
    prevalence_prior_dist.validate();
    if (prevalence_prior_dist.size() != n_labels)
      throw std::invalid_argument("loss: prevalence prior size mismatch");
  }
}

namespace {

void check_batch(const Mat& loglik, const std::vector<int>& labels,
                 const Vec& weights) {
  if (loglik.rows() != static_cast<Eigen::Index>(labels.size()) ||
      loglik.rows() != weights.size())
    throw std::invalid_argument("loss: batch row mismatch");
  if (loglik.rows() < 1) throw std::invalid_argument("loss: empty batch");
}

LossResult weighted_nll(const Mat& loglik, const std::vector<int>& labels,
                        const Vec& weights, double total_n) {
  check_batch(loglik, labels, weights);
  const Eigen::Index n = loglik.rows();
  const double scale = total_n / static_cast<double>(n);
  LossResult r;
  r.dloglik = Mat::Zero(n, loglik.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    r.value -= scale * weights[i] * loglik(i, y);
    r.dloglik(i, y) -= scale * weights[i];
  }
  return r;
}

}  // namespace

LossResult nll_loss(const Mat& loglik, const std::vector<int>& labels,
                    const Vec& weights, double total_n) {
  return weighted_nll(loglik, labels, weights, total_n);
}

LossResult iw_loss(const Mat& loglik, const std::vector<int>& labels,
                   const Vec& weights, double total_n) {
  return weighted_nll(loglik, labels, weights, total_n);
}

LossResult ig_loss(const Mat& loglik, const std::vector<int>& labels,
                   const MarginalEstimate& est, const Vec& log_q,
                   const Vec& weights, double total_n, bool full_batch) {
  check_batch(loglik, labels, weights);
  const Eigen::Index n = loglik.rows();
  const Eigen::Index k = loglik.cols();
  const Vec& log_marg = full_batch ? est.log_phat : log_q;
  if (log_marg.size() != k)
    throw std::invalid_argument("ig_loss: log-marginal size mismatch");
  const double scale = total_n / static_cast<double>(n);

  LossResult r;
  r.dloglik = Mat::Zero(n, k);
  // upstream gradient on each label's log-marginal
  Vec upstream = Vec::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    r.value += scale * weights[i] * (log_marg[y] - loglik(i, y));
    r.dloglik(i, y) -= scale * weights[i];
    upstream[y] += scale * weights[i];
  }
  if (!full_batch)
    upstream.array() *= marginal_gradient_scale(est, log_q).array();
  r.dloglik += marginal_backward(est, loglik, upstream);
  return r;
}

std::pair<double, Vec> prevalence_prior_loss(const Vec& marginal_log,
                                             const LabelDist& p_hat,
                                             double n_pr) {
  if (n_pr < 0.0)
    throw std::invalid_argument("prevalence prior: count must be >= 0");
  if (n_pr == 0.0)
    return {0.0, Vec::Zero(marginal_log.size())};
  p_hat.validate();
  if (p_hat.size() != marginal_log.size())
    throw std::invalid_argument("prevalence prior: size mismatch");
  const double value = -n_pr * p_hat.p.dot(marginal_log);
  return {value, (-n_pr * p_hat.p.array()).matrix()};
}

void MinibatchPolicy::validate(int n_labels) const {
  if (batch_size < 1)
    throw std::invalid_argument("minibatch: batch size must be >= 1");
  if (scheme == BatchScheme::FixedCounts) {
    if (static_cast<int>(counts.size()) != n_labels)
      throw std::invalid_argument("minibatch: counts size mismatch");
    int total = 0;
    for (int c : counts) {
      if (c < 0) throw std::invalid_argument("minibatch: negative count");
      total += c;
    }
    if (total != batch_size)
      throw std::invalid_argument("minibatch: counts must sum to batch size");
  }
}

LabelDist MinibatchPolicy::expected_dist(const Dataset& data,
                                         int n_labels) const {
  if (scheme == BatchScheme::FixedCounts) {
    Vec p(n_labels);
    for (int cix = 0; cix < n_labels; ++cix)
      p[cix] = static_cast<double>(counts[static_cast<std::size_t>(cix)]) /
               batch_size;
    return LabelDist(p);
  }
  return data.label_frequencies(n_labels);
}

namespace {

// Per-class index queues for the fixed-counts scheme: sampling without
// replacement within a class, reshuffled when exhausted.
class ClassQueues {
 public:
  ClassQueues(const Dataset& data, int n_labels, RngStream& rng)
      : rng_(rng), pools_(static_cast<std::size_t>(n_labels)) {
    for (int i = 0; i < data.size(); ++i)
      pools_[static_cast<std::size_t>(data.y[static_cast<std::size_t>(i)])]
          .push_back(i);
    cursors_.assign(pools_.size(), 0);
    for (auto& pool : pools_) rng_.shuffle(pool);
  }

  void reshuffle_all() {
    for (std::size_t k = 0; k < pools_.size(); ++k) {
      rng_.shuffle(pools_[k]);
      cursors_[k] = 0;
    }
  }

  int draw(int label) {
    auto& pool = pools_[static_cast<std::size_t>(label)];
    if (pool.empty())
      throw std::runtime_error("minibatch: dataset has no sample of label " +
                               std::to_string(label));
    auto& cur = cursors_[static_cast<std::size_t>(label)];
    if (cur >= pool.size()) {
      rng_.shuffle(pool);
      cur = 0;
    }
    return pool[cur++];
  }

 private:
  RngStream& rng_;
  std::vector<std::vector<int>> pools_;
  std::vector<std::size_t> cursors_;
};

Mat rows_of(const Mat& x, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        x.row(idx[i]);
  return out;
}

Vec batch_weights(const WeightPolicy& policy, const LabelDist& target,
                  const std::vector<int>& labels, int n_labels,
                  bool fallback_to_expected) {
  try {
    return corrective_weights(policy, target, labels, n_labels);
  } catch (const std::invalid_argument&) {
    if (policy.kind == WeightKind::Empirical && fallback_to_expected) {
      WeightPolicy fb = policy;
      fb.kind = WeightKind::Expected;
      return corrective_weights(fb, target, labels, n_labels);
    }
    throw;
  }
}

}  // namespace

TrainResult train(const Dataset& data, const ModelSpec& spec,
                  const LossConfig& loss, const MinibatchPolicy& policy,
                  const std::optional<AuxSpec>& aux_spec,
                  const TrainConfig& cfg) {
  spec.validate();
  const int k = spec.n_labels();
  data.validate(k);
  loss.validate(k);
  policy.validate(k);
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  const int n_data = data.size();
  if (n_data < 1) throw std::invalid_argument("train: empty dataset");
  const bool use_ig = loss.kind == LossKind::Ig;
  if (use_ig && !cfg.full_batch && !aux_spec.has_value())
    throw std::invalid_argument(
        "train: minibatch information-gain training needs an auxiliary spec");

  RngStream init_rng = RngStream::derive(cfg.seed, "init");
  RngStream batch_rng = RngStream::derive(cfg.seed, "minibatch");

  TrainResult result;
  result.w = init_params(spec, init_rng);
  AdamState w_state = AdamState::zeros(result.w.size());

  const LabelDist p_dataset = data.label_frequencies(k);
  // a full batch holds the whole dataset, so its label distribution is
  // the dataset's regardless of the configured policy
  const LabelDist p_tilde =
      cfg.full_batch ? p_dataset : policy.expected_dist(data, k);
  WeightPolicy wpolicy{cfg.weight_kind, p_tilde};

  AuxOptState aux_opt;
  if (use_ig && aux_spec.has_value() && !cfg.full_batch) {
    AuxSpec as = *aux_spec;
    as.main_dim = static_cast<int>(result.w.size());
    as.validate();
    result.aux_spec = as;
    result.aux = aux_init(as, result.w, loss.true_prevalence);
    aux_opt = aux_opt_init(as);
    result.has_aux = true;
  }

  std::optional<ClassQueues> queues;
  if (!cfg.full_batch && policy.scheme == BatchScheme::FixedCounts)
    queues.emplace(data, k, batch_rng);

  const int n_batch = cfg.full_batch ? n_data : policy.batch_size;
  const int batches_per_epoch =
      cfg.full_batch ? 1 : (n_data + n_batch - 1) / n_batch;

  std::vector<int> all_indices(static_cast<std::size_t>(n_data));
  std::iota(all_indices.begin(), all_indices.end(), 0);

  long t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (queues) queues->reshuffle_all();
    double loss_sum = 0.0;
    double aux_kl_sum = 0.0;
    for (int b = 0; b < batches_per_epoch; ++b) {
      std::vector<int> idx;
      if (cfg.full_batch) {
        idx = all_indices;
      } else if (policy.scheme == BatchScheme::IidUniform) {
        idx.resize(static_cast<std::size_t>(n_batch));
        for (auto& v : idx) v = batch_rng.uniform_int(n_data);
      } else {
        for (int label = 0; label < k; ++label)
          for (int c = 0; c < policy.counts[static_cast<std::size_t>(label)];
               ++c)
            idx.push_back(queues->draw(label));
      }

      const Mat xb = rows_of(data.x, idx);
      std::vector<int> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        yb[i] = data.y[static_cast<std::size_t>(idx[i])];

      const Mat loglik = log_lik_batch(spec, result.w, xb);

      LossResult lr;
      Vec aux_phat;
      Vec log_q;
      MarginalEstimate est;
      if (use_ig) {
        const Vec beta = batch_weights(wpolicy, loss.true_prevalence, yb, k,
                                       cfg.fallback_to_expected);
        est = marginal_estimate(loglik, yb, beta);
        log_q = cfg.full_batch ? est.log_phat
                               : aux_forward(result.aux_spec, result.aux,
                                             result.w);
        const Vec omega =
            batch_weights(wpolicy, p_dataset, yb, k, cfg.fallback_to_expected);
        lr = ig_loss(loglik, yb, est, log_q, omega, n_data, cfg.full_batch);
        aux_phat = est.log_phat.array().exp().matrix();
      } else if (loss.kind == LossKind::Iw) {
        const Vec beta = batch_weights(wpolicy, loss.true_prevalence, yb, k,
                                       cfg.fallback_to_expected);
        lr = iw_loss(loglik, yb, beta, n_data);
      } else {
        const Vec omega =
            batch_weights(wpolicy, p_dataset, yb, k, cfg.fallback_to_expected);
        lr = nll_loss(loglik, yb, omega, n_data);
      }

      double total_value = lr.value + prior_neg_log_density(loss.prior, result.w);
      if (use_ig && loss.prevalence_prior_n > 0.0) {
        auto [pv, dmarg] = prevalence_prior_loss(log_q, loss.prevalence_prior_dist,
                                                 loss.prevalence_prior_n);
        total_value += pv;
        Vec upstream = dmarg;
        if (!cfg.full_batch)
          upstream.array() *= marginal_gradient_scale(est, log_q).array();
        lr.dloglik += marginal_backward(est, loglik, upstream);
      }

      if (!std::isfinite(total_value))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", minibatch " +
                                 std::to_string(b));
      loss_sum += total_value;

      Vec w_grad = loglik_backward_batch(spec, result.w, xb, lr.dloglik) +
                   prior_grad(loss.prior, result.w);

      AuxParams aux_grad;
      if (result.has_aux && !cfg.full_batch) {
        aux_kl_sum += aux_kl_loss(aux_phat, log_q);
        aux_grad = aux_kl_grad(result.aux_spec, result.aux, result.w, aux_phat);
      }

      ++t;
      adam_step(w_state, result.w, w_grad, cfg.adam, t);
      if (result.has_aux && !cfg.full_batch)
        aux_step(result.aux_spec, result.aux, aux_grad, aux_opt, t);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / batches_per_epoch;
    entry.aux_kl = aux_kl_sum / batches_per_epoch;
    if (result.has_aux)
      entry.marginal = aux_forward(result.aux_spec, result.aux, result.w)
                           .array()
                           .exp()
                           .matrix();
    result.log.push_back(std::move(entry));
  }

  // Full-batch information-gain training has no auxiliary model; expose
  // the final full-batch marginal estimate as a constant one so the
  // checkpoint still supports selection-rule prediction.
  if (use_ig && cfg.full_batch && !result.has_aux) {
    const Mat loglik = log_lik_batch(spec, result.w, data.x);
    const Vec beta = batch_weights(wpolicy, loss.true_prevalence, data.y, k,
                                   cfg.fallback_to_expected);
    const MarginalEstimate est = marginal_estimate(loglik, data.y, beta);
    AuxSpec as;
    as.kind = AuxKind::Constant;
    as.main_dim = static_cast<int>(result.w.size());
    as.labels = spec.labels;
    result.aux_spec = as;
    result.aux.logits = est.log_phat;
    result.has_aux = true;
    if (!result.log.empty())
      result.log.back().marginal = est.log_phat.array().exp().matrix();
  }

  return result;
}

}  // namespace prevcorr
