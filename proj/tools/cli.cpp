#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "prevcorr/datagen.hpp"
#include "prevcorr/grid_posterior.hpp"
#include "prevcorr/io.hpp"
#include "prevcorr/losses.hpp"
#include "prevcorr/metrics.hpp"
#include "prevcorr/predict.hpp"
#include "prevcorr/rng.hpp"

namespace prevcorr::cli {

namespace {

// "0.01" -> (0.99, 0.01); "0.2,0.3,0.5" -> explicit vector
LabelDist parse_prevalence(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  if (vals.empty()) throw std::invalid_argument("empty prevalence");
  if (vals.size() == 1) return LabelDist::binary(vals[0]);
  Vec p(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    p[static_cast<Eigen::Index>(i)] = vals[i];
  LabelDist d(p);
  d.validate(1e-6);
  return d;
}

struct SeedOverride {
  std::optional<std::uint64_t> value;
  std::uint64_t pick(std::uint64_t from_config) const {
    return value ? *value : from_config;
  }
};

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const SeedOverride& seed_flag) {
  const json cfg = read_json(config_path);
  check_keys(cfg, {"population", "sampler", "n", "seed", "design", "p_tilde"},
             "simulate");
  const PopulationSpec pop = population_spec_from_json(cfg.at("population"));
  const std::string sampler = cfg.value("sampler", std::string("true-population"));
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = seed_flag.pick(cfg.value("seed", std::uint64_t{0}));

  Dataset data;
  if (sampler == "true-population") {
    data = sample_true_population(pop, n, seed);
  } else if (sampler == "label-biased") {
    const json& dj = cfg.at("design");
    check_keys(dj, {"probs", "counts"}, "simulate.design");
    BiasDesign design;
    if (dj.contains("counts")) {
      design.exact_counts = true;
      design.counts = dj["counts"].get<std::vector<int>>();
    } else {
      Vec p(static_cast<Eigen::Index>(dj.at("probs").size()));
      for (std::size_t i = 0; i < dj["probs"].size(); ++i)
        p[static_cast<Eigen::Index>(i)] = dj["probs"][i].get<double>();
      design.probs = LabelDist(p);
    }
    data = sample_label_biased(pop, design, n, seed);
  } else if (sampler == "selection") {
    Vec p(static_cast<Eigen::Index>(cfg.at("p_tilde").size()));
    for (std::size_t i = 0; i < cfg["p_tilde"].size(); ++i)
      p[static_cast<Eigen::Index>(i)] = cfg["p_tilde"][i].get<double>();
    data = sample_via_selection(pop, LabelDist(p), n, seed);
  } else {
    throw std::invalid_argument("simulate: unknown sampler '" + sampler + "'");
  }

  write_dataset_csv(data, out_path);
  json side = cfg;
  side["seed"] = seed;
  write_dataset_sidecar(side, seed, out_path);
  std::cout << "wrote " << data.size() << " samples to " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path, const SeedOverride& seed_flag) {
  const json cfg = read_json(config_path);
  check_keys(cfg,
             {"model", "loss", "minibatch", "aux", "optimizer", "seed",
              "weight_policy", "full_batch", "fallback_to_expected",
              "standardize"},
             "train");
  const ModelSpec spec = model_spec_from_json(cfg.at("model"));
  const LossConfig loss = loss_config_from_json(cfg.at("loss"));
  MinibatchPolicy policy;
  if (cfg.contains("minibatch"))
    policy = minibatch_policy_from_json(cfg["minibatch"]);

  TrainConfig tc;
  if (cfg.contains("optimizer")) {
    const json& oj = cfg["optimizer"];
    check_keys(oj, {"lr", "epochs", "beta1", "beta2", "eps"}, "train.optimizer");
    tc.adam.lr = oj.value("lr", tc.adam.lr);
    tc.epochs = oj.value("epochs", tc.epochs);
    tc.adam.beta1 = oj.value("beta1", tc.adam.beta1);
    tc.adam.beta2 = oj.value("beta2", tc.adam.beta2);
    tc.adam.eps = oj.value("eps", tc.adam.eps);
  }
  tc.seed = seed_flag.pick(cfg.value("seed", std::uint64_t{0}));
  if (cfg.contains("weight_policy")) {
    const std::string w = cfg["weight_policy"].get<std::string>();
    if (w == "empirical")
      tc.weight_kind = WeightKind::Empirical;
    else if (w == "expected")
      tc.weight_kind = WeightKind::Expected;
    else
      throw std::invalid_argument("train: unknown weight policy '" + w + "'");
  }
  tc.full_batch = cfg.value("full_batch", false);
  tc.fallback_to_expected = cfg.value("fallback_to_expected", false);

  std::optional<AuxSpec> aux;
  if (cfg.contains("aux") && !cfg["aux"].is_null())
    aux = aux_spec_from_json(cfg["aux"]);

  Dataset data = read_dataset_csv(data_path);
  std::optional<Standardization> st;
  if (cfg.value("standardize", false)) {
    auto [mean, sd] = standardize_features(data);
    st = Standardization{mean, sd};
  }

  const TrainResult result = train(data, spec, loss, policy, aux, tc);

  Checkpoint ck;
  ck.model = spec;
  ck.w = result.w;
  ck.has_aux = result.has_aux;
  ck.aux_spec = result.aux_spec;
  ck.aux = result.aux;
  ck.loss = loss;
  ck.seed = tc.seed;
  ck.standardization = st;
  ck.training_log = result.log;
  write_checkpoint(ck, out_path);
  std::cout << "trained " << result.log.size() << " epochs; final loss "
            << (result.log.empty() ? 0.0 : result.log.back().loss) << "\n";
  return 0;
}

Mat checkpoint_loglik(const Checkpoint& ck, Dataset& data) {
  if (ck.standardization)
    apply_standardization(data, ck.standardization->mean,
                          ck.standardization->sd);
  data.validate(ck.model.n_labels());
  return log_lik_batch(ck.model, ck.w, data.x);
}

int cmd_predict(const std::string& ckpt_path, const std::string& data_path,
                const std::string& out_path, const std::string& rule,
                const std::string& test_prevalence, bool unknown,
                double alpha0_k) {
  const Checkpoint ck = read_checkpoint(ckpt_path);
  Dataset data = read_dataset_csv(data_path);
  const Mat loglik = checkpoint_loglik(ck, data);
  const int k = ck.model.n_labels();
  const Eigen::Index n = loglik.rows();

  Mat probs(n, k);
  json meta;
  if (rule == "population" && !unknown) {
    for (Eigen::Index i = 0; i < n; ++i)
      probs.row(i) = predict_population(loglik.row(i).transpose()).p.transpose();
    meta["rule"] = "population";
  } else {
    const Vec log_marg = ck.log_marginal();
    if (unknown) {
      const LabelDist marginal(log_marg.array().exp().matrix());
      const Vec alpha0 = marginal_matched_alpha0(marginal, alpha0_k);
      const DirichletState st =
          infer_unknown_prevalence(loglik, log_marg, alpha0);
      probs = st.q;
      meta["rule"] = "selection-unknown";
      meta["alpha0_k"] = alpha0_k;
      meta["dirichlet"] = dirichlet_state_to_json(st);
      if (!st.converged)
        std::cerr << "warning: prevalence inference stopped before the "
                     "tolerance was reached\n";
    } else {
      if (test_prevalence.empty())
        throw std::invalid_argument(
            "predict: the selection rule needs --test-prevalence (or --unknown)");
      const LabelDist p_tilde = parse_prevalence(test_prevalence);
      for (Eigen::Index i = 0; i < n; ++i)
        probs.row(i) = predict_selection_known(loglik.row(i).transpose(),
                                               log_marg, p_tilde)
                           .p.transpose();
      meta["rule"] = "selection-known";
      meta["test_prevalence"] = std::vector<double>(
          p_tilde.p.data(), p_tilde.p.data() + p_tilde.p.size());
    }
  }

  // argmax actions (uniform misclassification cost)
  Mat zero_one = Mat::Ones(k, k) - Mat::Identity(k, k);
  std::vector<int> actions(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    actions[static_cast<std::size_t>(i)] =
        decide(LabelDist(probs.row(i).transpose()), zero_one);

  write_predictions_csv(probs, actions, out_path);
  write_json(meta, out_path + ".meta.json");
  std::cout << "wrote predictions for " << n << " samples to " << out_path
            << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& out_path, const std::string& curves_path,
             const std::string& true_prevalence, const std::string& rule_flag) {
  const Checkpoint ck = read_checkpoint(ckpt_path);
  Dataset data = read_dataset_csv(data_path);
  const Mat loglik = checkpoint_loglik(ck, data);
  const int k = ck.model.n_labels();
  const Eigen::Index n = loglik.rows();

  LabelDist p_y;
  if (!true_prevalence.empty())
    p_y = parse_prevalence(true_prevalence);
  else if (ck.loss.true_prevalence.size() == k)
    p_y = ck.loss.true_prevalence;
  else
    p_y = data.label_frequencies(k);  // unweighted fallback

  std::string rule = rule_flag;
  if (rule == "auto") rule = ck.has_aux ? "selection" : "population";

  // hold-out predictions under the evaluation rule; the selection rule
  // is informed by the apparent hold-out label frequencies
  Mat pred(n, k);
  if (rule == "selection") {
    const Vec log_marg = ck.log_marginal();
    const LabelDist holdout_freq = data.label_frequencies(k);
    if (!holdout_freq.strictly_positive())
      throw std::invalid_argument("eval: every label must appear in the data");
    for (Eigen::Index i = 0; i < n; ++i)
      pred.row(i) = predict_selection_known(loglik.row(i).transpose(), log_marg,
                                            holdout_freq)
                        .p.transpose();
  } else if (rule == "population") {
    for (Eigen::Index i = 0; i < n; ++i)
      pred.row(i) = predict_population(loglik.row(i).transpose()).p.transpose();
  } else {
    throw std::invalid_argument("eval: unknown rule '" + rule + "'");
  }

  std::vector<int> actions(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best;
    pred.row(i).maxCoeff(&best);
    actions[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }

  // reweighted true-population risk with empirical-count weights
  Vec loglik_true(n);
  for (Eigen::Index i = 0; i < n; ++i)
    loglik_true[i] = loglik(i, data.y[static_cast<std::size_t>(i)]);
  WeightPolicy wp{WeightKind::Empirical, {}};
  const Vec beta = corrective_weights(wp, p_y, data.y, k);
  const RiskReport nell = nell_true_population(loglik_true, beta);

  double ho_ll = quiet_nan();
  if (ck.has_aux) {
    const Vec log_marg = ck.log_marginal();
    Vec log_marg_true(n);
    for (Eigen::Index i = 0; i < n; ++i)
      log_marg_true[i] = log_marg[data.y[static_cast<std::size_t>(i)]];
    ho_ll = holdout_ll(loglik_true, log_marg_true);
  }

  const double rsk = holdout_risk(pred, data.y);
  const ConfusionMatrix cm = confusion(actions, data.y, k);
  const SummaryStats stats = summary_stats(cm);

  double auc = quiet_nan();
  std::vector<CurvePoint> curve;
  if (k == 2) {
    Vec scores = loglik.col(1).array().exp().matrix();
    auto [c, a] = roc_auc(scores, data.y);
    auc = a;
    curve = im_curve(std::move(c), p_y.p[1]);
  }

  json report = metrics_report_json(stats, nell, rsk, ho_ll, auc);
  if (k > 2) report["OOA"] = one_off_accuracy(actions, data.y);
  report["rule"] = rule;
  report["n"] = static_cast<long>(n);
  write_json(report, out_path);
  if (!curves_path.empty() && !curve.empty()) write_curves_csv(curve, curves_path);
  std::cout << "wrote metrics to " << out_path << "\n";
  return 0;
}

int cmd_grid(const std::string& config_path, const std::string& data_path,
             const std::string& out_prefix) {
  const json cfg = read_json(config_path);
  check_keys(cfg,
             {"model", "objective", "coords", "prior", "true_prevalence",
              "prevalence_prior_n", "prevalence_prior_dist", "population",
              "grid"},
             "grid");
  const Dataset data = read_dataset_csv(data_path);

  ModelSpec spec;
  if (cfg.contains("model")) {
    spec = model_spec_from_json(cfg["model"]);
  } else {
    spec.kind = ModelKind::LogisticBinary;
    spec.input_dim = 1;
    spec.labels.size = 2;
  }

  GridPosteriorConfig gc;
  const std::string obj = cfg.value("objective", std::string("ig"));
  if (obj == "ig")
    gc.objective = GridObjective::Ig;
  else if (obj == "bias-free")
    gc.objective = GridObjective::BiasFree;
  else if (obj == "iw")
    gc.objective = GridObjective::Iw;
  else
    throw std::invalid_argument("grid: unknown objective '" + obj + "'");

  const std::string coords = cfg.value("coords", std::string("group-logits"));
  if (coords == "group-logits")
    gc.coords = GridCoords::GroupLogits;
  else if (coords == "params")
    gc.coords = GridCoords::Params;
  else
    throw std::invalid_argument("grid: unknown coords '" + coords + "'");

  if (cfg.contains("prior")) {
    check_keys(cfg["prior"], {"kind", "sd"}, "grid.prior");
    const std::string pk = cfg["prior"].value("kind", std::string("normal"));
    gc.prior.kind =
        pk == "flat" ? GridPrior::Kind::Flat : GridPrior::Kind::Normal;
    gc.prior.sd = cfg["prior"].value("sd", 10.0);
  }

  if (cfg.contains("true_prevalence")) {
    Vec p(static_cast<Eigen::Index>(cfg["true_prevalence"].size()));
    for (std::size_t i = 0; i < cfg["true_prevalence"].size(); ++i)
      p[static_cast<Eigen::Index>(i)] = cfg["true_prevalence"][i].get<double>();
    gc.true_prevalence = LabelDist(p);
  }

  gc.prevalence_prior_n = cfg.value("prevalence_prior_n", 0.0);
  if (cfg.contains("prevalence_prior_dist")) {
    Vec p(static_cast<Eigen::Index>(cfg["prevalence_prior_dist"].size()));
    for (std::size_t i = 0; i < cfg["prevalence_prior_dist"].size(); ++i)
      p[static_cast<Eigen::Index>(i)] =
          cfg["prevalence_prior_dist"][i].get<double>();
    gc.prevalence_prior_dist = LabelDist(p);
  }

  const bool need_pop = gc.objective == GridObjective::Ig ||
                        gc.prevalence_prior_n > 0.0;
  if (need_pop) {
    if (!cfg.contains("population") || cfg["population"].is_string()) {
      // default: reweight the observed covariates to the true prevalence
      if (gc.true_prevalence.size() == 0)
        throw std::invalid_argument(
            "grid: the reweighted input distribution needs true_prevalence");
      gc.population = reweighted_covariate_table(data, gc.true_prevalence);
    } else {
      check_keys(cfg["population"], {"points", "probs"}, "grid.population");
      json pts = cfg["population"]["points"];
      gc.population.x.resize(static_cast<Eigen::Index>(pts.size()),
                             spec.input_dim);
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (int d = 0; d < spec.input_dim; ++d)
          gc.population.x(static_cast<Eigen::Index>(i), d) =
              pts[i][static_cast<std::size_t>(d)].get<double>();
      gc.population.px =
          Vec(static_cast<Eigen::Index>(cfg["population"]["probs"].size()));
      for (std::size_t i = 0; i < cfg["population"]["probs"].size(); ++i)
        gc.population.px[static_cast<Eigen::Index>(i)] =
            cfg["population"]["probs"][i].get<double>();
    }
  }

  GridSpec grid;
  if (cfg.contains("grid")) {
    check_keys(cfg["grid"], {"axes"}, "grid.grid");
    for (const auto& aj : cfg["grid"]["axes"]) {
      check_keys(aj, {"lo", "hi", "points", "name"}, "grid.grid.axes");
      GridAxis ax;
      ax.lo = aj.value("lo", -10.0);
      ax.hi = aj.value("hi", 10.0);
      ax.points = aj.value("points", 401);
      ax.name = aj.value("name", std::string());
      grid.axes.push_back(ax);
    }
  } else {
    const int n_axes =
        gc.coords == GridCoords::GroupLogits ? 2 : param_count(spec);
    grid.axes.assign(static_cast<std::size_t>(n_axes), GridAxis{});
  }
  if (gc.coords == GridCoords::GroupLogits) {
    if (grid.axes[0].name.empty()) grid.axes[0].name = "logit0";
    if (grid.axes[1].name.empty()) grid.axes[1].name = "logit1";
  }

  const GridPosterior post = grid_log_posterior(spec, data, gc, grid);
  write_grid_csv(post, out_prefix + ".csv");

  json stats;
  stats["objective"] = obj;
  stats["cells"] = post.cells();
  stats["total_mass"] = post.total_mass();
  if (post.dims() == 2 && gc.coords == GridCoords::GroupLogits) {
    const FunctionalStats lo = posterior_log_odds_stats(post);
    stats["log_odds_ratio"] = {{"mean", lo.mean},
                               {"sd", lo.sd},
                               {"q05", lo.q05},
                               {"q50", lo.q50},
                               {"q95", lo.q95}};
    try {
      const TwoByTwoStats freq = two_by_two_stats(data);
      stats["frequentist"] = {{"odds_ratio", freq.odds_ratio},
                              {"log_odds_ratio", freq.log_odds_ratio},
                              {"woolf_sd", freq.woolf_sd}};
    } catch (const std::invalid_argument&) {
      // not a complete 2x2 table; skip the comparators
    }
  }
  for (int d = 0; d < post.dims(); ++d) {
    Vec sel = Vec::Zero(post.dims());
    sel[d] = 1.0;
    const FunctionalStats fs = posterior_functional_stats(post, sel);
    stats["axes"].push_back(
        {{"name", post.axes[static_cast<std::size_t>(d)].name},
         {"mean", fs.mean},
         {"sd", fs.sd}});
  }
  write_json(stats, out_prefix + ".json");
  std::cout << "wrote grid posterior (" << post.cells() << " cells) to "
            << out_prefix << ".csv\n";
  return 0;
}

// finite-difference audit of every model/loss pairing
int cmd_gradcheck(std::uint64_t seed) {
  struct Case {
    std::string name;
    ModelSpec spec;
    LossKind loss;
  };
  std::vector<Case> cases;
  ModelSpec logistic{ModelKind::LogisticBinary, 3, 0, Activation::Tanh, {2, {}}};
  ModelSpec multi{ModelKind::LogisticMultinomial, 2, 0, Activation::Tanh, {3, {}}};
  ModelSpec mlp_tanh{ModelKind::MlpOneHidden, 2, 4, Activation::Tanh, {2, {}}};
  ModelSpec mlp_relu{ModelKind::MlpOneHidden, 3, 3, Activation::Relu, {3, {}}};
  for (const auto& [name, spec] :
       std::vector<std::pair<std::string, ModelSpec>>{
           {"logistic-binary", logistic},
           {"logistic-multinomial", multi},
           {"mlp-tanh", mlp_tanh},
           {"mlp-relu", mlp_relu}}) {
    for (LossKind lk : {LossKind::Nll, LossKind::Iw, LossKind::Ig})
      cases.push_back({name + "/" +
                           (lk == LossKind::Nll ? "nll"
                            : lk == LossKind::Iw ? "iw"
                                                 : "ig"),
                       spec, lk});
  }

  bool all_ok = true;
  RngStream rng = RngStream::derive(seed, "gradcheck");
  for (const auto& c : cases) {
    const int n = 12;
    const int k = c.spec.n_labels();
    Mat x(n, c.spec.input_dim);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < c.spec.input_dim; ++d) x(i, d) = rng.normal();
      y[static_cast<std::size_t>(i)] = i % k;  // every class present
    }
    Vec w(param_count(c.spec));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.5 * rng.normal();

    Vec p_y_raw(k);
    for (int j = 0; j < k; ++j) p_y_raw[j] = 1.0 + j;
    const LabelDist p_y(p_y_raw / p_y_raw.sum());

    auto loss_at = [&](const Vec& wv) -> std::pair<double, Vec> {
      const Mat ll = log_lik_batch(c.spec, wv, x);
      WeightPolicy pol{WeightKind::Empirical, {}};
      LossResult lr;
      if (c.loss == LossKind::Nll) {
        const Vec ones = Vec::Ones(n);
        lr = nll_loss(ll, y, ones, n);
      } else if (c.loss == LossKind::Iw) {
        const Vec beta = corrective_weights(pol, p_y, y, k);
        lr = iw_loss(ll, y, beta, n);
      } else {
        const Vec beta = corrective_weights(pol, p_y, y, k);
        const MarginalEstimate est = marginal_estimate(ll, y, beta);
        const Vec ones = Vec::Ones(n);
        lr = ig_loss(ll, y, est, est.log_phat, ones, n, /*full_batch=*/true);
      }
      const Vec grad = loglik_backward_batch(c.spec, wv, x, lr.dloglik);
      return {lr.value, grad};
    };

    const auto [value, grad] = loss_at(w);
    (void)value;
    double max_rel = 0.0;
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Vec wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (loss_at(wp).first - loss_at(wm).first) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
      max_rel = std::max(max_rel, std::abs(fd - grad[i]) / denom);
    }
    const bool ok = max_rel < 1e-4;
    all_ok = all_ok && ok;
    std::cout << (ok ? "  ok  " : " FAIL ") << c.name
              << "  max relative error " << max_rel << "\n";
  }
  std::cout << (all_ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"prevalence-corrected training and prediction toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, ckpt_path, curves_path;
  std::string rule = "population";
  std::string eval_rule = "auto";
  std::string test_prevalence, true_prevalence;
  bool unknown = false;
  double alpha0_k = 1.0;
  SeedOverride seed_flag;
  std::uint64_t seed_value = 0;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed_flag.value = s; },
        "override the config seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--config", config_path, "generator config (JSON)")->required();
  sim->add_option("--out", out_path, "output dataset CSV")->required();
  add_seed(sim);

  CLI::App* tr = app.add_subcommand("train", "fit a model");
  tr->add_option("--config", config_path, "run config (JSON)")->required();
  tr->add_option("--data", data_path, "training dataset CSV")->required();
  tr->add_option("--out", out_path, "output checkpoint (JSON)")->required();
  add_seed(tr);

  CLI::App* pr = app.add_subcommand("predict", "predict with a trained model");
  pr->add_option("--ckpt", ckpt_path, "checkpoint JSON")->required();
  pr->add_option("--data", data_path, "dataset CSV")->required();
  pr->add_option("--out", out_path, "output predictions CSV")->required();
  pr->add_option("--rule", rule, "population | selection")
      ->check(CLI::IsMember({"population", "selection"}));
  pr->add_option("--test-prevalence", test_prevalence,
                 "known test label distribution (p1 or comma list)");
  pr->add_flag("--unknown", unknown, "infer the test label distribution");
  pr->add_option("--alpha0-k", alpha0_k,
                 "pseudo-count scale for the unknown-prevalence prior");

  CLI::App* ev = app.add_subcommand("eval", "evaluate a trained model");
  ev->add_option("--ckpt", ckpt_path, "checkpoint JSON")->required();
  ev->add_option("--data", data_path, "dataset CSV")->required();
  ev->add_option("--out", out_path, "output metrics JSON")->required();
  ev->add_option("--curves", curves_path, "optional curves CSV");
  ev->add_option("--true-prevalence", true_prevalence,
                 "true label distribution (p1 or comma list)");
  ev->add_option("--rule", eval_rule, "auto | population | selection")
      ->check(CLI::IsMember({"auto", "population", "selection"}));

  CLI::App* gr = app.add_subcommand("grid", "exact grid posterior");
  gr->add_option("--config", config_path, "grid config (JSON)")->required();
  gr->add_option("--data", data_path, "dataset CSV")->required();
  gr->add_option("--out-prefix", out_path, "output prefix")->required();

  CLI::App* gc = app.add_subcommand("gradcheck",
                                    "finite-difference gradient audit");
  gc->add_option("--seed", seed_value, "random seed");

  std::vector<const char*> argv;
  argv.push_back("prevcorr");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_path, seed_flag);
    if (tr->parsed()) return cmd_train(config_path, data_path, out_path, seed_flag);
    if (pr->parsed())
      return cmd_predict(ckpt_path, data_path, out_path, rule, test_prevalence,
                         unknown, alpha0_k);
    if (ev->parsed())
      return cmd_eval(ckpt_path, data_path, out_path, curves_path,
                      true_prevalence, eval_rule);
    if (gr->parsed()) return cmd_grid(config_path, data_path, out_path);
    if (gc->parsed()) return cmd_gradcheck(seed_value);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace prevcorr::cli
