#include "prevcorr/datagen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "prevcorr/rng.hpp"

namespace prevcorr {

int CovariateModel::dim() const {
  return finite ? static_cast<int>(points.cols())
                : static_cast<int>(dims.size());
}

void CovariateModel::validate() const {
  if (finite) {
    FinitePopulation p{points, probs};
    p.validate();
  } else {
    if (dims.empty())
      throw std::invalid_argument("covariates: no dimensions configured");
    for (const auto& d : dims) {
      if (d.kind == CovariateDim::Kind::Gaussian && d.sd <= 0.0)
        throw std::invalid_argument("covariates: Gaussian sd must be > 0");
      if (d.kind == CovariateDim::Kind::Bernoulli && (d.p < 0.0 || d.p > 1.0))
        throw std::invalid_argument("covariates: Bernoulli p out of range");
    }
  }
}

FinitePopulation CovariateModel::as_population() const {
  if (!finite)
    throw std::invalid_argument("covariates: not a finite table");
  return FinitePopulation{points, probs};
}

void PopulationSpec::validate() const {
  covariates.validate();
  model.validate();
  if (model.input_dim != covariates.dim())
    throw std::invalid_argument("population: covariate/model dimension mismatch");
  if (w_star.size() != param_count(model))
    throw std::invalid_argument("population: generating parameter size mismatch");
}

LabelDist population_prevalence(const PopulationSpec& pop) {
  pop.validate();
  return exact_marginal(pop.model, pop.w_star, pop.covariates.as_population());
}

namespace {

Vec draw_covariates(const CovariateModel& cov, RngStream& rng) {
  if (cov.finite) {
    const int i = rng.categorical(cov.probs);
    return cov.points.row(i).transpose();
  }
  Vec x(cov.dim());
  for (std::size_t d = 0; d < cov.dims.size(); ++d) {
    const auto& spec = cov.dims[d];
    x[static_cast<Eigen::Index>(d)] =
        spec.kind == CovariateDim::Kind::Gaussian
            ? spec.mean + spec.sd * rng.normal()
            : (rng.bernoulli(spec.p) ? 1.0 : 0.0);
  }
  return x;
}

}  // namespace

LabelDist population_prevalence_mc(const PopulationSpec& pop, int n,
                                   std::uint64_t seed) {
  pop.validate();
  if (n < 1) throw std::invalid_argument("prevalence_mc: n must be >= 1");
  RngStream rng = RngStream::derive(seed, "prevalence-mc");
  Vec acc = Vec::Zero(pop.model.n_labels());
  for (int i = 0; i < n; ++i) {
    const Vec x = draw_covariates(pop.covariates, rng);
    acc += log_lik(pop.model, pop.w_star, x).array().exp().matrix();
  }
  return LabelDist(acc / static_cast<double>(n));
}

Dataset sample_true_population(const PopulationSpec& pop, int n,
                               std::uint64_t seed) {
  pop.validate();
  if (n < 0) throw std::invalid_argument("sample: n must be >= 0");
  RngStream rng = RngStream::derive(seed, "data");
  Dataset out;
  out.x.resize(n, pop.covariates.dim());
  out.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vec x = draw_covariates(pop.covariates, rng);
    const Vec probs = log_lik(pop.model, pop.w_star, x).array().exp().matrix();
    out.x.row(i) = x.transpose();
    out.y[static_cast<std::size_t>(i)] = rng.categorical(probs);
  }
  out.provenance = {"true-population", seed, ""};
  return out;
}

void BiasDesign::validate(int n_labels, int n) const {
  if (exact_counts) {
    if (static_cast<int>(counts.size()) != n_labels)
      throw std::invalid_argument("bias design: counts size mismatch");
    int total = 0;
    for (int c : counts) {
      if (c < 0) throw std::invalid_argument("bias design: negative count");
      total += c;
    }
    if (total != n)
      throw std::invalid_argument("bias design: counts must sum to n");
  } else {
    probs.validate();
    if (probs.size() != n_labels)
      throw std::invalid_argument("bias design: probability size mismatch");
  }
}

namespace {

// Support-point probabilities of x given y on a finite table,
// p(x|y) = p(y|x, w*) p(x) / p(y|w*).
Mat conditional_table(const PopulationSpec& pop) {
  const FinitePopulation fp = pop.covariates.as_population();
  const int k = pop.model.n_labels();
  const Eigen::Index m = fp.x.rows();
  Mat cond(m, k);
  for (Eigen::Index i = 0; i < m; ++i)
    cond.row(i) =
        (log_lik(pop.model, pop.w_star, fp.x.row(i).transpose()).array().exp() *
         fp.px[i])
            .transpose();
  for (int y = 0; y < k; ++y) {
    const double z = cond.col(y).sum();
    if (z <= 0.0)
      throw std::invalid_argument(
          "bias design: label " + std::to_string(y) +
          " has zero probability under the generating process");
    cond.col(y) /= z;
  }
  return cond;
}

constexpr long kRejectionBudget = 1000000;

// Rejection sampler for x ~ p(x|y) with proposal p(x): accept with
// probability p(y|x, w*) / bound(y), where bound(y) >= max_x p(y|x, w*)
// is estimated on a proposal-drawn probe set (then padded).
class ConditionalSampler {
 public:
  ConditionalSampler(const PopulationSpec& pop, RngStream& rng)
      : pop_(pop), rng_(rng) {
    const int k = pop.model.n_labels();
    bound_.assign(static_cast<std::size_t>(k), 0.0);
    RngStream probe = RngStream::derive(0x9d5f, "rejection-bound");
    for (int i = 0; i < 4096; ++i) {
      const Vec x = draw_covariates(pop.covariates, probe);
      const Vec p = log_lik(pop.model, pop.w_star, x).array().exp().matrix();
      for (int y = 0; y < k; ++y)
        bound_[static_cast<std::size_t>(y)] =
            std::max(bound_[static_cast<std::size_t>(y)], p[y]);
    }
    for (auto& b : bound_) b = std::min(1.0, b * 1.05);
  }

  Vec draw(int label) {
    for (long attempt = 0; attempt < kRejectionBudget; ++attempt) {
      const Vec x = draw_covariates(pop_.covariates, rng_);
      const double p = std::exp(log_lik(pop_.model, pop_.w_star, x)[label]);
      if (rng_.uniform() * bound_[static_cast<std::size_t>(label)] < p)
        return x;
    }
    throw std::runtime_error(
        "bias design: rejection sampler exhausted its retry budget for label " +
        std::to_string(label) + "; the label is too rare under the generating process");
  }

 private:
  const PopulationSpec& pop_;
  RngStream& rng_;
  std::vector<double> bound_;
};

}  // namespace

Dataset sample_label_biased(const PopulationSpec& pop, const BiasDesign& design,
                            int n, std::uint64_t seed) {
  pop.validate();
  const int k = pop.model.n_labels();
  design.validate(k, n);
  RngStream rng = RngStream::derive(seed, "data");

  // labels first
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  if (design.exact_counts) {
    for (int y = 0; y < k; ++y)
      labels.insert(
          labels.end(),
          static_cast<std::size_t>(design.counts[static_cast<std::size_t>(y)]),
          y);
    rng.shuffle(labels);
  } else {
    for (int i = 0; i < n; ++i) labels.push_back(rng.categorical(design.probs.p));
  }

  Dataset out;
  out.x.resize(n, pop.covariates.dim());
  out.y = labels;
  if (pop.covariates.finite) {
    const Mat cond = conditional_table(pop);
    const FinitePopulation fp = pop.covariates.as_population();
    for (int i = 0; i < n; ++i) {
      const int point =
          rng.categorical(cond.col(labels[static_cast<std::size_t>(i)]));
      out.x.row(i) = fp.x.row(point);
    }
  } else {
    ConditionalSampler sampler(pop, rng);
    for (int i = 0; i < n; ++i)
      out.x.row(i) = sampler.draw(labels[static_cast<std::size_t>(i)]).transpose();
  }
  out.provenance = {"label-biased", seed,
                    design.exact_counts ? "exact-counts" : "iid-labels"};
  return out;
}

Vec selection_probability(const LabelDist& p_tilde, const LabelDist& marginal) {
  p_tilde.validate();
  marginal.validate();
  if (p_tilde.size() != marginal.size())
    throw std::invalid_argument("selection: size mismatch");
  if (!p_tilde.strictly_positive() || !marginal.strictly_positive())
    throw std::invalid_argument("selection: distributions must be positive");
  const double a = (marginal.p.array() / p_tilde.p.array()).minCoeff();
  return (a * p_tilde.p.array() / marginal.p.array()).matrix();
}

Dataset sample_via_selection(const PopulationSpec& pop, const LabelDist& p_tilde,
                             int n, std::uint64_t seed) {
  pop.validate();
  const LabelDist marginal = pop.covariates.finite
                                 ? population_prevalence(pop)
                                 : population_prevalence_mc(pop, 200000, seed);
  const Vec accept = selection_probability(p_tilde, marginal);
  RngStream rng = RngStream::derive(seed, "data");
  Dataset out;
  out.x.resize(n, pop.covariates.dim());
  out.y.resize(static_cast<std::size_t>(n));
  int filled = 0;
  for (long attempt = 0; filled < n; ++attempt) {
    if (attempt >= kRejectionBudget + 100L * n)
      throw std::runtime_error(
          "selection: retry budget exceeded after " + std::to_string(filled) +
          " of " + std::to_string(n) + " samples");
    const Vec x = draw_covariates(pop.covariates, rng);
    const Vec probs = log_lik(pop.model, pop.w_star, x).array().exp().matrix();
    const int y = rng.categorical(probs);
    if (rng.uniform() < accept[y]) {
      out.x.row(filled) = x.transpose();
      out.y[static_cast<std::size_t>(filled)] = y;
      ++filled;
    }
  }
  out.provenance = {"selection", seed, ""};
  return out;
}

Dataset contingency_dataset() {
  Dataset out;
  out.x.resize(100, 1);
  out.y.resize(100);
  int row = 0;
  auto fill = [&](double x, int y, int count) {
    for (int i = 0; i < count; ++i) {
      out.x(row, 0) = x;
      out.y[static_cast<std::size_t>(row)] = y;
      ++row;
    }
  };
  fill(0.0, 0, 47);
  fill(0.0, 1, 44);
  fill(1.0, 0, 3);
  fill(1.0, 1, 6);
  out.provenance = {"contingency-study", 0, "fixed"};
  return out;
}

PopulationSpec make_clinical_like_population(const Vec& coefficients) {
  if (coefficients.size() != 8)
    throw std::invalid_argument("clinical population: expected 7 weights + bias");
  PopulationSpec pop;
  pop.covariates.finite = false;
  pop.covariates.dims = {
      {CovariateDim::Kind::Gaussian, 0.0, 1.0, 0.0},   // age-like, standardized
      {CovariateDim::Kind::Gaussian, 0.0, 1.0, 0.0},   // size-like, standardized
      {CovariateDim::Kind::Bernoulli, 0.0, 1.0, 0.5},  // sex-like
      {CovariateDim::Kind::Bernoulli, 0.0, 1.0, 0.4},  // habit-like
      {CovariateDim::Kind::Bernoulli, 0.0, 1.0, 0.2},  // condition-like
      {CovariateDim::Kind::Bernoulli, 0.0, 1.0, 0.5},  // location-like
      {CovariateDim::Kind::Bernoulli, 0.0, 1.0, 0.3},  // texture-like
  };
  pop.model.kind = ModelKind::LogisticBinary;
  pop.model.input_dim = 7;
  pop.model.labels.size = 2;
  pop.w_star = coefficients;
  return pop;
}

PopulationSpec make_clinical_like_population() {
  Vec coef(8);
  coef << 0.8, 1.2, -0.3, 0.6, 0.9, 0.2, 0.5, -0.4;
  return make_clinical_like_population(coef);
}

std::pair<Vec, Vec> standardize_features(Dataset& data) {
  const Eigen::Index n = data.x.rows();
  if (n < 2) throw std::invalid_argument("standardize: needs >= 2 rows");
  Vec mean = data.x.colwise().mean();
  Vec sd(data.x.cols());
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) {
    const double var = (data.x.col(c).array() - mean[c]).square().sum() /
                       static_cast<double>(n - 1);
    sd[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  apply_standardization(data, mean, sd);
  return {mean, sd};
}

void apply_standardization(Dataset& data, const Vec& mean, const Vec& sd) {
  if (mean.size() != data.x.cols() || sd.size() != data.x.cols())
    throw std::invalid_argument("standardize: transform size mismatch");
  for (Eigen::Index c = 0; c < data.x.cols(); ++c)
    data.x.col(c) = ((data.x.col(c).array() - mean[c]) / sd[c]).matrix();
}

}  // namespace prevcorr
