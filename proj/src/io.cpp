#include "prevcorr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prevcorr {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

Mat mat_from_json(const json& rows) {
  if (rows.empty()) return Mat(0, 0);
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(rows[0].size());
  Mat m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r)
    m.row(r) = vec_from_json(rows[static_cast<std::size_t>(r)]).transpose();
  return m;
}

}  // namespace

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
  }
}

json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dataset: cannot open " + path);
  const int d = data.dim();
  for (int c = 0; c < d; ++c) out << "f" << c << ",";
  out << "y\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int c = 0; c < d; ++c) out << format_double(data.x(i, c)) << ",";
    out << data.y[static_cast<std::size_t>(i)] << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("dataset: missing header in " + path);
  int d = 0;
  {
    std::stringstream hs(line);
    std::string cell;
    std::vector<std::string> headers;
    while (std::getline(hs, cell, ',')) headers.push_back(cell);
    if (headers.empty() || headers.back() != "y")
      throw std::runtime_error("dataset: header must end with 'y'");
    d = static_cast<int>(headers.size()) - 1;
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != d + 1)
      throw std::runtime_error("dataset: ragged row in " + path);
    labels.push_back(static_cast<int>(std::lround(row.back())));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), d);
  out.y = std::move(labels);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < d; ++c)
      out.x(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
  return out;
}

void write_dataset_sidecar(const json& generator_spec, std::uint64_t seed,
                           const std::string& dataset_path) {
  json j;
  j["generator"] = generator_spec;
  j["seed"] = seed;
  write_json(j, dataset_path + ".json");
}

// ---- enum names ----

namespace {

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::LogisticBinary: return "logistic-binary";
    case ModelKind::LogisticMultinomial: return "logistic-multinomial";
    case ModelKind::MlpOneHidden: return "mlp-1hidden";
  }
  throw std::logic_error("model kind");
}

ModelKind kind_from(const std::string& s) {
  if (s == "logistic-binary") return ModelKind::LogisticBinary;
  if (s == "logistic-multinomial") return ModelKind::LogisticMultinomial;
  if (s == "mlp-1hidden") return ModelKind::MlpOneHidden;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string loss_name(LossKind k) {
  switch (k) {
    case LossKind::Nll: return "nll";
    case LossKind::Iw: return "iw";
    case LossKind::Ig: return "ig";
  }
  throw std::logic_error("loss kind");
}

LossKind loss_from(const std::string& s) {
  if (s == "nll") return LossKind::Nll;
  if (s == "iw") return LossKind::Iw;
  if (s == "ig") return LossKind::Ig;
  throw std::invalid_argument("unknown loss kind: " + s);
}

}  // namespace

json model_spec_to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = kind_name(spec.kind);
  j["input_dim"] = spec.input_dim;
  if (spec.kind == ModelKind::MlpOneHidden) {
    j["hidden_dim"] = spec.hidden_dim;
    j["activation"] = spec.activation == Activation::Tanh ? "tanh" : "relu";
  }
  j["labels"] = spec.labels.size;
  if (!spec.labels.names.empty()) j["label_names"] = spec.labels.names;
  return j;
}

ModelSpec model_spec_from_json(const json& j) {
  check_keys(j, {"kind", "input_dim", "hidden_dim", "activation", "labels",
                 "label_names"},
             "model");
  ModelSpec spec;
  spec.kind = kind_from(j.at("kind").get<std::string>());
  spec.input_dim = j.at("input_dim").get<int>();
  spec.labels.size = j.at("labels").get<int>();
  if (j.contains("label_names"))
    spec.labels.names = j["label_names"].get<std::vector<std::string>>();
  if (j.contains("hidden_dim")) spec.hidden_dim = j["hidden_dim"].get<int>();
  if (j.contains("activation")) {
    const std::string a = j["activation"].get<std::string>();
    if (a == "tanh")
      spec.activation = Activation::Tanh;
    else if (a == "relu")
      spec.activation = Activation::Relu;
    else
      throw std::invalid_argument("unknown activation: " + a);
  }
  spec.validate();
  return spec;
}

json loss_config_to_json(const LossConfig& cfg) {
  json j;
  j["kind"] = loss_name(cfg.kind);
  j["prior"] = {{"kind", cfg.prior.kind == PriorKind::Gaussian ? "gaussian"
                                                               : "student-t"},
                {"lambda", cfg.prior.lambda},
                {"nu", cfg.prior.nu}};
  if (cfg.true_prevalence.size() > 0)
    j["true_prevalence"] = vec_to_json(cfg.true_prevalence.p);
  j["prevalence_prior_n"] = cfg.prevalence_prior_n;
  if (cfg.prevalence_prior_n > 0.0)
    j["prevalence_prior_dist"] = vec_to_json(cfg.prevalence_prior_dist.p);
  return j;
}

LossConfig loss_config_from_json(const json& j) {
  check_keys(j,
             {"kind", "prior", "true_prevalence", "prevalence_prior_n",
              "prevalence_prior_dist"},
             "loss");
  LossConfig cfg;
  cfg.kind = loss_from(j.at("kind").get<std::string>());
  if (j.contains("prior")) {
    check_keys(j["prior"], {"kind", "lambda", "nu"}, "loss.prior");
    const json& p = j["prior"];
    if (p.contains("kind")) {
      const std::string k = p["kind"].get<std::string>();
      if (k == "gaussian")
        cfg.prior.kind = PriorKind::Gaussian;
      else if (k == "student-t")
        cfg.prior.kind = PriorKind::StudentT;
      else
        throw std::invalid_argument("unknown prior kind: " + k);
    }
    if (p.contains("lambda")) cfg.prior.lambda = p["lambda"].get<double>();
    if (p.contains("nu")) cfg.prior.nu = p["nu"].get<double>();
  }
  if (j.contains("true_prevalence"))
    cfg.true_prevalence = LabelDist(vec_from_json(j["true_prevalence"]));
  if (j.contains("prevalence_prior_n"))
    cfg.prevalence_prior_n = j["prevalence_prior_n"].get<double>();
  if (j.contains("prevalence_prior_dist"))
    cfg.prevalence_prior_dist =
        LabelDist(vec_from_json(j["prevalence_prior_dist"]));
  return cfg;
}

json minibatch_policy_to_json(const MinibatchPolicy& p) {
  json j;
  j["scheme"] =
      p.scheme == BatchScheme::IidUniform ? "iid-uniform" : "fixed-counts";
  j["batch_size"] = p.batch_size;
  if (p.scheme == BatchScheme::FixedCounts) j["counts"] = p.counts;
  return j;
}

MinibatchPolicy minibatch_policy_from_json(const json& j) {
  check_keys(j, {"scheme", "batch_size", "counts"}, "minibatch");
  MinibatchPolicy p;
  const std::string s = j.at("scheme").get<std::string>();
  if (s == "iid-uniform")
    p.scheme = BatchScheme::IidUniform;
  else if (s == "fixed-counts")
    p.scheme = BatchScheme::FixedCounts;
  else
    throw std::invalid_argument("unknown minibatch scheme: " + s);
  p.batch_size = j.at("batch_size").get<int>();
  if (j.contains("counts")) p.counts = j["counts"].get<std::vector<int>>();
  return p;
}

json aux_spec_to_json(const AuxSpec& spec) {
  json j;
  j["kind"] = spec.kind == AuxKind::Constant ? "constant" : "affine";
  j["main_dim"] = spec.main_dim;
  j["labels"] = spec.labels.size;
  j["lr_bias"] = spec.lr_bias;
  j["lr_offset"] = spec.lr_offset;
  j["lr_matrix"] = spec.lr_matrix;
  j["sparsity_strength"] = spec.sparsity_strength;
  return j;
}

AuxSpec aux_spec_from_json(const json& j) {
  check_keys(j,
             {"kind", "main_dim", "labels", "lr_bias", "lr_offset", "lr_matrix",
              "sparsity_strength"},
             "aux");
  AuxSpec spec;
  const std::string k = j.at("kind").get<std::string>();
  if (k == "constant")
    spec.kind = AuxKind::Constant;
  else if (k == "affine")
    spec.kind = AuxKind::Affine;
  else
    throw std::invalid_argument("unknown aux kind: " + k);
  if (j.contains("main_dim")) spec.main_dim = j["main_dim"].get<int>();
  if (j.contains("labels")) spec.labels.size = j["labels"].get<int>();
  if (j.contains("lr_bias")) spec.lr_bias = j["lr_bias"].get<double>();
  if (j.contains("lr_offset")) spec.lr_offset = j["lr_offset"].get<double>();
  if (j.contains("lr_matrix")) spec.lr_matrix = j["lr_matrix"].get<double>();
  if (j.contains("sparsity_strength"))
    spec.sparsity_strength = j["sparsity_strength"].get<double>();
  return spec;
}

json population_spec_to_json(const PopulationSpec& pop) {
  json j;
  j["model"] = model_spec_to_json(pop.model);
  j["w_star"] = vec_to_json(pop.w_star);
  json cov;
  if (pop.covariates.finite) {
    cov["kind"] = "finite";
    cov["points"] = mat_to_json(pop.covariates.points);
    cov["probs"] = vec_to_json(pop.covariates.probs);
  } else {
    cov["kind"] = "independent";
    json dims = json::array();
    for (const auto& d : pop.covariates.dims) {
      if (d.kind == CovariateDim::Kind::Gaussian)
        dims.push_back({{"kind", "gaussian"}, {"mean", d.mean}, {"sd", d.sd}});
      else
        dims.push_back({{"kind", "bernoulli"}, {"p", d.p}});
    }
    cov["dims"] = dims;
  }
  j["covariates"] = cov;
  return j;
}

PopulationSpec population_spec_from_json(const json& j) {
  check_keys(j, {"model", "w_star", "covariates"}, "population");
  PopulationSpec pop;
  pop.model = model_spec_from_json(j.at("model"));
  pop.w_star = vec_from_json(j.at("w_star"));
  const json& cov = j.at("covariates");
  check_keys(cov, {"kind", "points", "probs", "dims"}, "population.covariates");
  const std::string kind = cov.at("kind").get<std::string>();
  if (kind == "finite") {
    pop.covariates.finite = true;
    pop.covariates.points = mat_from_json(cov.at("points"));
    pop.covariates.probs = vec_from_json(cov.at("probs"));
  } else if (kind == "independent") {
    pop.covariates.finite = false;
    for (const auto& dj : cov.at("dims")) {
      check_keys(dj, {"kind", "mean", "sd", "p"}, "population.covariates.dims");
      CovariateDim d;
      const std::string dk = dj.at("kind").get<std::string>();
      if (dk == "gaussian") {
        d.kind = CovariateDim::Kind::Gaussian;
        d.mean = dj.value("mean", 0.0);
        d.sd = dj.value("sd", 1.0);
      } else if (dk == "bernoulli") {
        d.kind = CovariateDim::Kind::Bernoulli;
        d.p = dj.value("p", 0.5);
      } else {
        throw std::invalid_argument("unknown covariate kind: " + dk);
      }
      pop.covariates.dims.push_back(d);
    }
  } else {
    throw std::invalid_argument("unknown covariate model: " + kind);
  }
  pop.validate();
  return pop;
}

// ---- checkpoint ----

Vec Checkpoint::log_marginal() const {
  if (!has_aux)
    throw std::runtime_error(
        "checkpoint: no auxiliary marginal model was trained");
  return aux_forward(aux_spec, aux, w);
}

json checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["model"] = model_spec_to_json(ck.model);
  j["w"] = vec_to_json(ck.w);
  if (ck.has_aux) {
    json a = aux_spec_to_json(ck.aux_spec);
    if (ck.aux_spec.kind == AuxKind::Constant) {
      a["logits"] = vec_to_json(ck.aux.logits);
    } else {
      a["weight"] = mat_to_json(ck.aux.weight);
      a["offset"] = vec_to_json(ck.aux.offset);
      a["bias"] = vec_to_json(ck.aux.bias);
    }
    j["aux"] = a;
  } else {
    j["aux"] = nullptr;
  }
  j["loss"] = loss_config_to_json(ck.loss);
  j["seed"] = ck.seed;
  if (ck.standardization) {
    j["standardization"] = {{"mean", vec_to_json(ck.standardization->mean)},
                            {"sd", vec_to_json(ck.standardization->sd)}};
  }
  json log = json::array();
  for (const auto& e : ck.training_log) {
    json entry;
    entry["epoch"] = e.epoch;
    entry["loss"] = json_number(e.loss);
    entry["aux_kl"] = json_number(e.aux_kl);
    if (e.marginal.size() > 0) entry["marginal"] = vec_to_json(e.marginal);
    log.push_back(entry);
  }
  j["training_log"] = log;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  check_keys(j,
             {"model", "w", "aux", "loss", "seed", "standardization",
              "training_log"},
             "checkpoint");
  Checkpoint ck;
  ck.model = model_spec_from_json(j.at("model"));
  ck.w = vec_from_json(j.at("w"));
  if (j.contains("aux") && !j["aux"].is_null()) {
    json a = j["aux"];
    ck.has_aux = true;
    json spec_part = a;
    spec_part.erase("logits");
    spec_part.erase("weight");
    spec_part.erase("offset");
    spec_part.erase("bias");
    ck.aux_spec = aux_spec_from_json(spec_part);
    if (ck.aux_spec.kind == AuxKind::Constant) {
      ck.aux.logits = vec_from_json(a.at("logits"));
    } else {
      ck.aux.weight = mat_from_json(a.at("weight"));
      ck.aux.offset = vec_from_json(a.at("offset"));
      ck.aux.bias = vec_from_json(a.at("bias"));
    }
  }
  ck.loss = loss_config_from_json(j.at("loss"));
  ck.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("standardization") && !j["standardization"].is_null()) {
    check_keys(j["standardization"], {"mean", "sd"}, "standardization");
    Standardization st;
    st.mean = vec_from_json(j["standardization"].at("mean"));
    st.sd = vec_from_json(j["standardization"].at("sd"));
    ck.standardization = st;
  }
  if (j.contains("training_log")) {
    for (const auto& ej : j["training_log"]) {
      EpochLog e;
      e.epoch = ej.value("epoch", 0);
      e.loss = ej.contains("loss") && !ej["loss"].is_null()
                   ? ej["loss"].get<double>()
                   : quiet_nan();
      e.aux_kl = ej.contains("aux_kl") && !ej["aux_kl"].is_null()
                     ? ej["aux_kl"].get<double>()
                     : quiet_nan();
      if (ej.contains("marginal")) e.marginal = vec_from_json(ej["marginal"]);
      ck.training_log.push_back(std::move(e));
    }
  }
  return ck;
}

void write_checkpoint(const Checkpoint& ck, const std::string& path) {
  write_json(checkpoint_to_json(ck), path);
}

Checkpoint read_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_json(path));
}

void write_predictions_csv(const Mat& probs, const std::vector<int>& actions,
                           const std::string& path) {
  if (probs.rows() != static_cast<Eigen::Index>(actions.size()))
    throw std::invalid_argument("predictions: row mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("predictions: cannot open " + path);
  for (Eigen::Index c = 0; c < probs.cols(); ++c) out << "p" << c << ",";
  out << "action\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) out << probs(i, c) << ",";
    out << actions[static_cast<std::size_t>(i)] << "\n";
  }
}

void write_curves_csv(const std::vector<CurvePoint>& curve,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("curves: cannot open " + path);
  out << "threshold,fpr,tpr,informedness,markedness\n";
  out.precision(17);
  for (const auto& pt : curve)
    out << pt.threshold << "," << pt.fpr << "," << pt.tpr << ","
        << pt.informedness << "," << pt.markedness << "\n";
}

json metrics_report_json(const SummaryStats& stats, const RiskReport& nell,
                         double holdout_risk_value, double holdout_ll_value,
                         double auc) {
  json j;
  j["NELL"] = json_number(nell.corrected);
  j["NELL_value"] = json_number(nell.value);
  j["NELL_std"] = json_number(nell.std_error);
  j["NLL_HO"] = json_number(-holdout_ll_value);
  j["Rsk_HO"] = json_number(holdout_risk_value);
  j["Acc"] = json_number(stats.accuracy);
  j["BAcc"] = json_number(stats.balanced_accuracy);
  if (stats.true_rates.size() == 2) {
    j["TNR"] = json_number(stats.true_rates[0]);
    j["TPR"] = json_number(stats.true_rates[1]);
    j["NPV"] = json_number(stats.predictive_values[0]);
    j["PPV"] = json_number(stats.predictive_values[1]);
  } else {
    j["TR"] = json::array();
    j["PV"] = json::array();
    for (Eigen::Index y = 0; y < stats.true_rates.size(); ++y) {
      j["TR"].push_back(json_number(stats.true_rates[y]));
      j["PV"].push_back(json_number(stats.predictive_values[y]));
    }
  }
  j["AUC"] = json_number(auc);
  j["I"] = json_number(stats.informedness);
  j["M"] = json_number(stats.markedness);
  j["MCC"] = json_number(stats.mcc);
  return j;
}

json dirichlet_state_to_json(const DirichletState& st) {
  json j;
  j["alpha"] = vec_to_json(st.alpha);
  j["converged"] = st.converged;
  j["iterations"] = st.iterations;
  Vec mean = st.alpha / st.alpha.sum();
  j["prevalence_mean"] = vec_to_json(mean);
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("json: cannot open " + path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("json: cannot open " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace prevcorr
