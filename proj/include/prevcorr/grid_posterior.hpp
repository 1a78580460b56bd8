#pragma once

#include <string>
#include <vector>

#include "prevcorr/losses.hpp"
#include "prevcorr/marginal.hpp"
#include "prevcorr/model.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

struct GridAxis {
  double lo = -10.0;
  double hi = 10.0;
  int points = 401;
  std::string name;

  void validate() const;
  double step() const { return (hi - lo) / (points - 1); }
  double coord(int i) const { return lo + i * step(); }
};

struct GridSpec {
  std::vector<GridAxis> axes;

  void validate() const;
  long cells() const;
};

// Objective evaluated on the grid. BiasFree is the plain log-loss
// posterior; Ig subtracts the log-marginal per sample; Iw weights the
// log-likelihood terms by true-over-apparent prevalence.
enum class GridObjective { BiasFree, Ig, Iw };

// Coordinate system of the grid: raw model parameters, or per-group
// logits for the two-parameter binary model on a 0/1 covariate.
enum class GridCoords { Params, GroupLogits };

struct GridPrior {
  enum class Kind { Flat, Normal } kind = Kind::Normal;
  double sd = 10.0;  // independent zero-mean normal per coordinate
};

// Normalized posterior over the grid. log_density holds the log of a
// probability density; total mass under the trapezoid rule is 1.
struct GridPosterior {
  std::vector<GridAxis> axes;
  Vec log_density;  // row-major over the grid
  Vec log_mass;     // log_density + log trapezoid cell weight

  long cells() const { return log_density.size(); }
  int dims() const { return static_cast<int>(axes.size()); }
  // grid coordinates of a flat cell index
  Vec coords(long flat) const;
  double total_mass() const;  // exp(logsumexp(log_mass)), 1 after normalization
};

struct GridPosteriorConfig {
  GridObjective objective = GridObjective::Ig;
  GridCoords coords = GridCoords::Params;
  GridPrior prior;
  // input distribution used for the exact marginal inside the Ig
  // objective (and for selection-rule predictions)
  FinitePopulation population;
  LabelDist true_prevalence;        // Iw weights
  double prevalence_prior_n = 0.0;  // Ig pseudo-observations
  LabelDist prevalence_prior_dist;
};

// Exact log-posterior of a model with at most three parameters,
// evaluated cell by cell and normalized in log space.
GridPosterior grid_log_posterior(const ModelSpec& spec, const Dataset& data,
                                 const GridPosteriorConfig& cfg,
                                 const GridSpec& grid);

struct FunctionalStats {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

// Statistics of a linear functional of the grid coordinates under the
// posterior; weights has one entry per axis.
FunctionalStats posterior_functional_stats(const GridPosterior& post,
                                           const Vec& weights);

// The log odds ratio functional on a GroupLogits grid: logit1 - logit0.
FunctionalStats posterior_log_odds_stats(const GridPosterior& post);

enum class PredictiveRule { Population, Selection };

// Posterior-averaged prediction at a point: integrates the per-cell
// likelihood (or the selection-corrected likelihood) against the grid
// posterior.
LabelDist grid_predictive_posterior(const GridPosterior& post,
                                    const ModelSpec& spec, const Vec& x,
                                    const GridPosteriorConfig& cfg,
                                    PredictiveRule rule,
                                    const LabelDist& p_tilde = {});

// CSV export: one row per cell, coordinates then log-density.
void write_grid_csv(const GridPosterior& post, const std::string& path);

// Finite covariate table implied by a dataset whose labels were fixed
// by design: samples are reweighted by true-over-apparent prevalence
// before histogramming the covariate rows, giving an estimate of the
// true-population input distribution.
FinitePopulation reweighted_covariate_table(const Dataset& data,
                                            const LabelDist& p_y);

// Frequentist comparators on a 2x2 table (binary scalar covariate,
// binary label): the odds ratio, its log, and the Woolf standard error
// sqrt(sum of reciprocal cell counts).
struct TwoByTwoStats {
  double odds_ratio = 0.0;
  double log_odds_ratio = 0.0;
  double woolf_sd = 0.0;
  long cells[2][2] = {{0, 0}, {0, 0}};  // [x][y]
};

TwoByTwoStats two_by_two_stats(const Dataset& data);

}  // namespace prevcorr
