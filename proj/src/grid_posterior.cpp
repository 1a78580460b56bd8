#include "prevcorr/grid_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace prevcorr {

void GridAxis::validate() const {
  if (points < 3) throw std::invalid_argument("grid: needs >= 3 points per axis");
  if (!(lo < hi)) throw std::invalid_argument("grid: lo must be < hi");
}

void GridSpec::validate() const {
  if (axes.empty()) throw std::invalid_argument("grid: no axes");
  for (const auto& a : axes) a.validate();
}

long GridSpec::cells() const {
  long total = 1;
  for (const auto& a : axes) total *= a.points;
  return total;
}

Vec GridPosterior::coords(long flat) const {
  Vec c(dims());
  for (int d = dims() - 1; d >= 0; --d) {
    const int pts = axes[static_cast<std::size_t>(d)].points;
    c[d] = axes[static_cast<std::size_t>(d)].coord(static_cast<int>(flat % pts));
    flat /= pts;
  }
  return c;
}

double GridPosterior::total_mass() const {
  return std::exp(logsumexp(log_mass));
}

namespace {

// Distinct (x, y) pairs with multiplicities; grids re-evaluate the same
// few support points many times.
struct GroupedData {
  std::vector<Vec> x;
  std::vector<int> y;
  std::vector<double> count;
};

GroupedData group_samples(const Dataset& data) {
  GroupedData g;
  for (int i = 0; i < data.size(); ++i) {
    const Vec xi = data.x.row(i).transpose();
    const int yi = data.y[static_cast<std::size_t>(i)];
    bool found = false;
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      if (g.y[j] == yi && g.x[j] == xi) {
        g.count[j] += 1.0;
        found = true;
        break;
      }
    }
    if (!found) {
      g.x.push_back(xi);
      g.y.push_back(yi);
      g.count.push_back(1.0);
    }
  }
  return g;
}

double log_prior_at(const GridPrior& prior, const Vec& coords) {
  if (prior.kind == GridPrior::Kind::Flat) return 0.0;
  return -coords.squaredNorm() / (2.0 * prior.sd * prior.sd);
}

Vec params_at(GridCoords coords_kind, const Vec& coords) {
  if (coords_kind == GridCoords::Params) return coords;
  if (coords.size() != 2)
    throw std::invalid_argument("grid: group-logit coordinates need 2 axes");
  return params_from_group_logits(coords[0], coords[1]);
}

// log trapezoid weight of a flat cell index (includes the step sizes)
double log_trapezoid_weight(const std::vector<GridAxis>& axes, long flat) {
  double lw = 0.0;
  for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
    const auto& ax = axes[static_cast<std::size_t>(d)];
    const int i = static_cast<int>(flat % ax.points);
    flat /= ax.points;
    lw += std::log(ax.step());
    if (i == 0 || i == ax.points - 1) lw += std::log(0.5);
  }
  return lw;
}

}  // namespace

GridPosterior grid_log_posterior(const ModelSpec& spec, const Dataset& data,
                                 const GridPosteriorConfig& cfg,
                                 const GridSpec& grid) {
  spec.validate();
  grid.validate();
  const int k = spec.n_labels();
  data.validate(k);
  const int n_params = param_count(spec);
  if (n_params > 3)
    throw std::invalid_argument(
        "grid: exact evaluation is limited to models with <= 3 parameters");
  const int expect_axes =
      cfg.coords == GridCoords::GroupLogits ? 2 : n_params;
  if (static_cast<int>(grid.axes.size()) != expect_axes)
    throw std::invalid_argument("grid: axis count does not match the model");
  if (cfg.coords == GridCoords::GroupLogits &&
      (spec.kind != ModelKind::LogisticBinary || spec.input_dim != 1))
    throw std::invalid_argument(
        "grid: group-logit coordinates require the scalar binary model");
  if (cfg.prior.kind == GridPrior::Kind::Normal && cfg.prior.sd <= 0.0)
    throw std::invalid_argument("grid: prior sd must be positive");

  const bool need_marginal =
      cfg.objective == GridObjective::Ig || cfg.prevalence_prior_n > 0.0;
  if (need_marginal) cfg.population.validate();

  Vec iw_weights;
  if (cfg.objective == GridObjective::Iw) {
    cfg.true_prevalence.validate();
    const LabelDist apparent = data.label_frequencies(k);
    if (!apparent.strictly_positive())
      throw std::invalid_argument("grid: every label must appear in the data");
    iw_weights = (cfg.true_prevalence.p.array() / apparent.p.array()).matrix();
  }
  if (cfg.prevalence_prior_n > 0.0) {
    cfg.prevalence_prior_dist.validate();
    if (cfg.prevalence_prior_dist.size() != k)
      throw std::invalid_argument("grid: prevalence prior size mismatch");
  }

  const GroupedData grouped = group_samples(data);

  GridPosterior post;
  post.axes = grid.axes;
  const long cells = grid.cells();
  post.log_density.resize(cells);
  post.log_mass.resize(cells);

  parallel_for(cells, [&](long c) {
    const Vec coords = post.coords(c);
    const Vec w = params_at(cfg.coords, coords);
    double lp = log_prior_at(cfg.prior, coords);
    Vec log_marg;
    if (need_marginal) log_marg = log_exact_marginal(spec, w, cfg.population);
    for (std::size_t j = 0; j < grouped.x.size(); ++j) {
      const Vec ll = log_lik(spec, w, grouped.x[j]);
      const int y = grouped.y[j];
      switch (cfg.objective) {
        case GridObjective::BiasFree:
          lp += grouped.count[j] * ll[y];
          break;
        case GridObjective::Ig:
          lp += grouped.count[j] * (ll[y] - log_marg[y]);
          break;
        case GridObjective::Iw:
          lp += grouped.count[j] * iw_weights[y] * ll[y];
          break;
      }
    }
    if (cfg.prevalence_prior_n > 0.0)
      lp += cfg.prevalence_prior_n * cfg.prevalence_prior_dist.p.dot(log_marg);
    if (std::isnan(lp))
      throw std::runtime_error("grid: objective evaluated to NaN");
    post.log_density[c] = lp;
  });

  for (long c = 0; c < cells; ++c)
    post.log_mass[c] = post.log_density[c] + log_trapezoid_weight(post.axes, c);
  const double z = logsumexp(post.log_mass);
  if (!std::isfinite(z))
    throw std::runtime_error("grid: posterior has no finite mass on the grid");
  post.log_density.array() -= z;
  post.log_mass.array() -= z;
  return post;
}

FunctionalStats posterior_functional_stats(const GridPosterior& post,
                                           const Vec& weights) {
  if (weights.size() != post.dims())
    throw std::invalid_argument("functional: weight size must match axes");
  const long cells = post.cells();
  std::vector<std::pair<double, double>> value_mass(
      static_cast<std::size_t>(cells));
  double mean = 0.0;
  for (long c = 0; c < cells; ++c) {
    const double f = weights.dot(post.coords(c));
    const double m = std::exp(post.log_mass[c]);
    value_mass[static_cast<std::size_t>(c)] = {f, m};
    mean += m * f;
  }
  double var = 0.0;
  for (const auto& [f, m] : value_mass) var += m * (f - mean) * (f - mean);

  std::sort(value_mass.begin(), value_mass.end());
  FunctionalStats stats;
  stats.mean = mean;
  stats.sd = std::sqrt(std::max(0.0, var));
  double acc = 0.0;
  double q05 = value_mass.front().first;
  double q50 = q05, q95 = q05;
  bool h05 = false, h50 = false, h95 = false;
  for (const auto& [f, m] : value_mass) {
    acc += m;
    if (!h05 && acc >= 0.05) { q05 = f; h05 = true; }
    if (!h50 && acc >= 0.50) { q50 = f; h50 = true; }
    if (!h95 && acc >= 0.95) { q95 = f; h95 = true; }
  }
  stats.q05 = q05;
  stats.q50 = q50;
  stats.q95 = q95;
  return stats;
}

FunctionalStats posterior_log_odds_stats(const GridPosterior& post) {
  if (post.dims() != 2)
    throw std::invalid_argument("log-odds functional needs a 2-d grid");
  Vec w(2);
  w << -1.0, 1.0;
  return posterior_functional_stats(post, w);
}

LabelDist grid_predictive_posterior(const GridPosterior& post,
                                    const ModelSpec& spec, const Vec& x,
                                    const GridPosteriorConfig& cfg,
                                    PredictiveRule rule,
                                    const LabelDist& p_tilde) {
  const int k = spec.n_labels();
  if (rule == PredictiveRule::Selection) {
    p_tilde.validate();
    if (!p_tilde.strictly_positive() || p_tilde.size() != k)
      throw std::invalid_argument("grid predictive: invalid test distribution");
    cfg.population.validate();
  }
  const long cells = post.cells();
  Vec acc = Vec::Zero(k);
  for (long c = 0; c < cells; ++c) {
    const double m = std::exp(post.log_mass[c]);
    if (m == 0.0) continue;
    const Vec w = params_at(cfg.coords, post.coords(c));
    const Vec ll = log_lik(spec, w, x);
    if (rule == PredictiveRule::Population) {
      acc += m * ll.array().exp().matrix();
    } else {
      const Vec log_marg = log_exact_marginal(spec, w, cfg.population);
      Vec log_num(k);
      for (int y = 0; y < k; ++y)
        log_num[y] = ll[y] - log_marg[y] + std::log(p_tilde.p[y]);
      acc += m * (log_num.array() - logsumexp(log_num)).exp().matrix();
    }
  }
  // quadrature drift is tiny; keep the output an exact distribution
  acc /= acc.sum();
  return LabelDist(acc);
}

FinitePopulation reweighted_covariate_table(const Dataset& data,
                                            const LabelDist& p_y) {
  p_y.validate();
  data.validate(p_y.size());
  const LabelDist apparent = data.label_frequencies(p_y.size());
  if (!apparent.strictly_positive())
    throw std::invalid_argument(
        "covariate table: every label must appear in the data");
  std::vector<Vec> points;
  std::vector<double> mass;
  for (int i = 0; i < data.size(); ++i) {
    const Vec xi = data.x.row(i).transpose();
    const int yi = data.y[static_cast<std::size_t>(i)];
    const double w = p_y.p[yi] / apparent.p[yi];
    bool found = false;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (points[j] == xi) {
        mass[j] += w;
        found = true;
        break;
      }
    }
    if (!found) {
      points.push_back(xi);
      mass.push_back(w);
    }
  }
  FinitePopulation pop;
  pop.x.resize(static_cast<Eigen::Index>(points.size()), data.x.cols());
  pop.px.resize(static_cast<Eigen::Index>(points.size()));
  double total = 0.0;
  for (double m : mass) total += m;
  for (std::size_t j = 0; j < points.size(); ++j) {
    pop.x.row(static_cast<Eigen::Index>(j)) = points[j].transpose();
    pop.px[static_cast<Eigen::Index>(j)] = mass[j] / total;
  }
  return pop;
}

TwoByTwoStats two_by_two_stats(const Dataset& data) {
  data.validate(2);
  TwoByTwoStats st;
  for (int i = 0; i < data.size(); ++i) {
    const double xv = data.x(i, 0);
    if (data.x.cols() != 1 || (xv != 0.0 && xv != 1.0))
      throw std::invalid_argument("two-by-two: covariate must be scalar 0/1");
    ++st.cells[xv == 1.0 ? 1 : 0][data.y[static_cast<std::size_t>(i)]];
  }
  for (auto& row : st.cells)
    for (long c : row)
      if (c == 0)
        throw std::invalid_argument("two-by-two: empty cell, odds ratio undefined");
  const double n00 = static_cast<double>(st.cells[0][0]);
  const double n01 = static_cast<double>(st.cells[0][1]);
  const double n10 = static_cast<double>(st.cells[1][0]);
  const double n11 = static_cast<double>(st.cells[1][1]);
  st.odds_ratio = (n11 / n10) / (n01 / n00);
  st.log_odds_ratio = std::log(st.odds_ratio);
  st.woolf_sd = std::sqrt(1.0 / n00 + 1.0 / n01 + 1.0 / n10 + 1.0 / n11);
  return st;
}

void write_grid_csv(const GridPosterior& post, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("grid: cannot open " + path);
  out.precision(17);
  for (int d = 0; d < post.dims(); ++d) {
    const auto& name = post.axes[static_cast<std::size_t>(d)].name;
    out << (name.empty() ? "c" + std::to_string(d) : name) << ",";
  }
  out << "log_density\n";
  for (long c = 0; c < post.cells(); ++c) {
    const Vec coords = post.coords(c);
    for (Eigen::Index d = 0; d < coords.size(); ++d) out << coords[d] << ",";
    out << post.log_density[c] << "\n";
  }
}

}  // namespace prevcorr
