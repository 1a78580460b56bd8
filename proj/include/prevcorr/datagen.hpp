#pragma once

#include <cstdint>
#include <vector>

#include "prevcorr/marginal.hpp"
#include "prevcorr/model.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

// Covariate law: either a finite table of support points with explicit
// probabilities (everything exact), or independent per-dimension
// continuous/binary draws (label-conditional sampling then falls back
// to rejection).
struct CovariateDim {
  enum class Kind { Gaussian, Bernoulli } kind = Kind::Gaussian;
  double mean = 0.0;
  double sd = 1.0;
  double p = 0.5;  // Bernoulli only
};

struct CovariateModel {
  bool finite = true;
  Mat points;  // finite: m x d
  Vec probs;   // finite: m
  std::vector<CovariateDim> dims;  // independent dims otherwise

  int dim() const;
  void validate() const;
  FinitePopulation as_population() const;  // finite only
};

// Generating process: covariate law plus the true association.
struct PopulationSpec {
  CovariateModel covariates;
  ModelSpec model;
  Vec w_star;

  void validate() const;
};

// Exact label marginal of the generating process (finite covariate
// tables only).
LabelDist population_prevalence(const PopulationSpec& pop);

// Monte Carlo estimate of the label marginal; works for any covariate
// model. Deterministic given the seed.
LabelDist population_prevalence_mc(const PopulationSpec& pop, int n,
                                   std::uint64_t seed);

// i.i.d. draws x ~ p(x), then y ~ p(y|x, w_star).
Dataset sample_true_population(const PopulationSpec& pop, int n,
                               std::uint64_t seed);

// Label-first design: either i.i.d. label draws from `probs`, or exact
// per-label counts.
struct BiasDesign {
  bool exact_counts = false;
  LabelDist probs;
  std::vector<int> counts;

  void validate(int n_labels, int n) const;
};

// Labels are drawn first according to the design, then features from
// the true conditional p(x|y, w_star): exact Bayes inversion on finite
// tables, per-label rejection sampling otherwise.
Dataset sample_label_biased(const PopulationSpec& pop, const BiasDesign& design,
                            int n, std::uint64_t seed);

// Per-label acceptance probabilities of the selection mechanism that
// reproduces the target label distribution: accept(y) = a * p_tilde(y)
// / marginal(y) with a = min_y marginal(y)/p_tilde(y). At least one
// label is accepted with probability 1.
Vec selection_probability(const LabelDist& p_tilde, const LabelDist& marginal);

// Draw from the true population, accept by label, repeat until n
// samples pass. Distributionally equivalent to label-first sampling at
// the same target distribution.
Dataset sample_via_selection(const PopulationSpec& pop, const LabelDist& p_tilde,
                             int n, std::uint64_t seed);

// The fixed 100-sample two-by-two study dataset: a binary covariate x
// against a binary outcome with cell counts 47/44/3/6 and 50/50 column
// totals.
Dataset contingency_dataset();

// Seven-covariate synthetic generator patterned after a clinical
// metadata screening task: two continuous covariates (age- and
// size-like, standardized) and five binary ones. Coefficients are the
// generating logistic parameters (7 weights + bias).
PopulationSpec make_clinical_like_population(const Vec& coefficients);
PopulationSpec make_clinical_like_population();  // default coefficients

// In-place feature standardization; returns per-column (mean, sd).
std::pair<Vec, Vec> standardize_features(Dataset& data);
void apply_standardization(Dataset& data, const Vec& mean, const Vec& sd);

}  // namespace prevcorr
