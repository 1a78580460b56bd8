#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "prevcorr/io.hpp"

using namespace prevcorr;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("prevcorr_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json simulate_config() {
  json pop;
  pop["model"] = {{"kind", "logistic-binary"}, {"input_dim", 1}, {"labels", 2}};
  pop["w_star"] = {1.4, -1.6};
  pop["covariates"] = {
      {"kind", "finite"},
      {"points", {{-2.0}, {-1.0}, {0.0}, {1.0}, {2.0}}},
      {"probs", {0.2, 0.2, 0.2, 0.2, 0.2}}};
  json cfg;
  cfg["population"] = pop;
  cfg["sampler"] = "label-biased";
  cfg["design"] = {{"counts", {150, 150}}};
  cfg["n"] = 300;
  cfg["seed"] = 11;
  return cfg;
}

json train_config(double prevalence) {
  json cfg;
  cfg["model"] = {{"kind", "logistic-binary"}, {"input_dim", 1}, {"labels", 2}};
  cfg["loss"] = {{"kind", "ig"},
                 {"true_prevalence", {1.0 - prevalence, prevalence}},
                 {"prior", {{"kind", "gaussian"}, {"lambda", 1e-3}}}};
  cfg["minibatch"] = {{"scheme", "fixed-counts"},
                      {"batch_size", 30},
                      {"counts", {15, 15}}};
  cfg["aux"] = {{"kind", "constant"}, {"labels", 2}};
  cfg["optimizer"] = {{"lr", 0.05}, {"epochs", 60}};
  cfg["seed"] = 7;
  return cfg;
}

}  // namespace

TEST_CASE("full pipeline: simulate, train, predict, eval, grid") {
  TempDir tmp;
  const std::string sim_cfg = tmp.file("sim.json");
  const std::string data_csv = tmp.file("data.csv");
  write_json(simulate_config(), sim_cfg);
  REQUIRE(cli::run({"simulate", "--config", sim_cfg, "--out", data_csv}) == 0);
  REQUIRE(std::filesystem::exists(data_csv));
  REQUIRE(std::filesystem::exists(data_csv + ".json"));

  const Dataset data = read_dataset_csv(data_csv);
  REQUIRE(data.size() == 300);
  const auto counts = data.label_counts(2);
  CHECK(counts[0] == 150);
  CHECK(counts[1] == 150);

  // the marginal of the generating process, for the training prevalence
  const PopulationSpec pop = population_spec_from_json(simulate_config()["population"]);
  const double prevalence = population_prevalence(pop).p[1];

  const std::string tr_cfg = tmp.file("train.json");
  const std::string ckpt = tmp.file("model.ckpt.json");
  write_json(train_config(prevalence), tr_cfg);
  REQUIRE(cli::run({"train", "--config", tr_cfg, "--data", data_csv, "--out",
                    ckpt}) == 0);
  const Checkpoint ck = read_checkpoint(ckpt);
  CHECK(ck.has_aux);
  CHECK(ck.training_log.size() == 60);

  SUBCASE("population predictions are the exponentiated likelihood rows") {
    const std::string pred_csv = tmp.file("pred.csv");
    REQUIRE(cli::run({"predict", "--ckpt", ckpt, "--data", data_csv, "--out",
                      pred_csv, "--rule", "population"}) == 0);
    std::ifstream in(pred_csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "p0,p1,action");
    double p0, p1;
    char comma;
    int action;
    in >> p0 >> comma >> p1 >> comma >> action;
    const Vec row = log_lik(ck.model, ck.w, data.x.row(0).transpose());
    CHECK(p0 == doctest::Approx(std::exp(row[0])).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(std::exp(row[1])).epsilon(1e-12));
  }

  SUBCASE("selection at the model marginal equals the population rule") {
    const std::string a = tmp.file("pa.csv");
    const std::string b = tmp.file("pb.csv");
    REQUIRE(cli::run({"predict", "--ckpt", ckpt, "--data", data_csv, "--out", a,
                      "--rule", "population"}) == 0);
    const Vec marg = ck.log_marginal().array().exp().matrix();
    std::ostringstream tp;
    tp.precision(17);
    tp << marg[0] << "," << marg[1];
    REQUIRE(cli::run({"predict", "--ckpt", ckpt, "--data", data_csv, "--out", b,
                      "--rule", "selection", "--test-prevalence", tp.str()}) == 0);
    // compare the probability columns row by row
    std::ifstream fa(a), fb(b);
    std::string la, lb;
    std::getline(fa, la);
    std::getline(fb, lb);
    int rows = 0;
    while (std::getline(fa, la) && std::getline(fb, lb)) {
      std::stringstream sa(la), sb(lb);
      double va, vb;
      char c;
      sa >> va >> c;
      sb >> vb >> c;
      REQUIRE(std::abs(va - vb) < 1e-9);
      ++rows;
    }
    CHECK(rows == 300);
  }

  SUBCASE("unknown-prevalence predictions write the inference sidecar") {
    const std::string pred_csv = tmp.file("pu.csv");
    REQUIRE(cli::run({"predict", "--ckpt", ckpt, "--data", data_csv, "--out",
                      pred_csv, "--unknown", "--alpha0-k", "1"}) == 0);
    const json meta = read_json(pred_csv + ".meta.json");
    CHECK(meta["rule"] == "selection-unknown");
    CHECK(meta["dirichlet"]["alpha"].size() == 2);
    // balanced test data: the recovered prevalence should be near 0.5
    const double pi1 = meta["dirichlet"]["prevalence_mean"][1].get<double>();
    CHECK(std::abs(pi1 - 0.5) < 0.1);
  }

  SUBCASE("evaluation emits every reported column") {
    const std::string metrics = tmp.file("metrics.json");
    const std::string curves = tmp.file("curves.csv");
    REQUIRE(cli::run({"eval", "--ckpt", ckpt, "--data", data_csv, "--out",
                      metrics, "--curves", curves}) == 0);
    const json rep = read_json(metrics);
    for (const char* key : {"NELL", "NLL_HO", "Rsk_HO", "Acc", "TNR", "TPR",
                            "NPV", "PPV", "AUC", "I", "M", "MCC"})
      REQUIRE(rep.contains(key));
    const std::string curve_text = slurp(curves);
    CHECK(curve_text.find("threshold,fpr,tpr,informedness,markedness") == 0);
  }

  SUBCASE("metrics agree with direct library calls") {
    const std::string metrics = tmp.file("m2.json");
    REQUIRE(cli::run({"eval", "--ckpt", ckpt, "--data", data_csv, "--out",
                      metrics, "--rule", "population"}) == 0);
    const json rep = read_json(metrics);
    const Mat loglik = log_lik_batch(ck.model, ck.w, data.x);
    Vec scores(loglik.rows());
    std::vector<int> actions(static_cast<std::size_t>(loglik.rows()));
    for (Eigen::Index i = 0; i < loglik.rows(); ++i) {
      scores[i] = std::exp(loglik(i, 1));
      actions[static_cast<std::size_t>(i)] = scores[i] >= 0.5 ? 1 : 0;
    }
    const auto [curve, auc] = roc_auc(scores, data.y);
    CHECK(rep["AUC"].get<double>() == doctest::Approx(auc).epsilon(1e-12));
    const SummaryStats stats = summary_stats(confusion(actions, data.y, 2));
    CHECK(rep["Acc"].get<double>() ==
          doctest::Approx(stats.accuracy).epsilon(1e-12));
  }
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
  TempDir tmp;
  const std::string cfg = tmp.file("sim.json");
  write_json(simulate_config(), cfg);
  const std::string a = tmp.file("a.csv");
  const std::string b = tmp.file("b.csv");
  REQUIRE(cli::run({"simulate", "--config", cfg, "--out", a}) == 0);
  REQUIRE(cli::run({"simulate", "--config", cfg, "--out", b}) == 0);
  CHECK(slurp(a) == slurp(b));
  // an explicit seed override changes the draw
  const std::string c = tmp.file("c.csv");
  REQUIRE(cli::run({"simulate", "--config", cfg, "--out", c, "--seed", "99"}) == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("empty simulation writes only the header") {
  TempDir tmp;
  json cfg = simulate_config();
  cfg["n"] = 0;
  cfg["sampler"] = "true-population";
  const std::string cfg_path = tmp.file("sim.json");
  write_json(cfg, cfg_path);
  const std::string out = tmp.file("empty.csv");
  REQUIRE(cli::run({"simulate", "--config", cfg_path, "--out", out}) == 0);
  CHECK(slurp(out) == "f0,y\n");
}

TEST_CASE("configuration errors exit with code 2") {
  TempDir tmp;
  SUBCASE("unknown key in the config") {
    json cfg = simulate_config();
    cfg["sampler_typo"] = "x";
    const std::string path = tmp.file("bad.json");
    write_json(cfg, path);
    CHECK(cli::run({"simulate", "--config", path, "--out", tmp.file("o.csv")}) == 2);
  }
  SUBCASE("missing file") {
    CHECK(cli::run({"train", "--config", tmp.file("nope.json"), "--data",
                    tmp.file("nope.csv"), "--out", tmp.file("o.json")}) != 0);
  }
  SUBCASE("unparseable flags") {
    CHECK(cli::run({"predict", "--no-such-flag"}) == 2);
  }
}

TEST_CASE("plain and bias-corrected training agree on unbiased data") {
  TempDir tmp;
  json sim = simulate_config();
  sim["sampler"] = "true-population";
  sim.erase("design");
  sim["n"] = 500;
  const std::string sim_cfg = tmp.file("sim.json");
  const std::string train_csv = tmp.file("train.csv");
  const std::string test_csv = tmp.file("test.csv");
  write_json(sim, sim_cfg);
  REQUIRE(cli::run({"simulate", "--config", sim_cfg, "--out", train_csv}) == 0);
  REQUIRE(cli::run({"simulate", "--config", sim_cfg, "--out", test_csv,
                    "--seed", "123"}) == 0);

  const PopulationSpec pop =
      population_spec_from_json(simulate_config()["population"]);
  const double prevalence = population_prevalence(pop).p[1];

  json tr_ig = train_config(prevalence);
  tr_ig["minibatch"] = {{"scheme", "iid-uniform"}, {"batch_size", 50}};
  tr_ig["fallback_to_expected"] = true;
  json tr_nll = tr_ig;
  tr_nll["loss"] = {{"kind", "nll"}};
  tr_nll.erase("aux");

  const std::string cfg_ig = tmp.file("ig.json");
  const std::string cfg_nll = tmp.file("nll.json");
  const std::string ck_ig = tmp.file("ig.ckpt.json");
  const std::string ck_nll = tmp.file("nll.ckpt.json");
  write_json(tr_ig, cfg_ig);
  write_json(tr_nll, cfg_nll);
  REQUIRE(cli::run({"train", "--config", cfg_ig, "--data", train_csv, "--out",
                    ck_ig}) == 0);
  REQUIRE(cli::run({"train", "--config", cfg_nll, "--data", train_csv, "--out",
                    ck_nll}) == 0);

  const std::string pa = tmp.file("pa.csv");
  const std::string pb = tmp.file("pb.csv");
  REQUIRE(cli::run({"predict", "--ckpt", ck_ig, "--data", test_csv, "--out",
                    pa, "--rule", "population"}) == 0);
  REQUIRE(cli::run({"predict", "--ckpt", ck_nll, "--data", test_csv, "--out",
                    pb, "--rule", "population"}) == 0);

  std::ifstream fa(pa), fb(pb);
  std::string la, lb;
  std::getline(fa, la);
  std::getline(fb, lb);
  int agree = 0, total = 0;
  while (std::getline(fa, la) && std::getline(fb, lb)) {
    const int aa = la.back() - '0';
    const int ab = lb.back() - '0';
    agree += aa == ab;
    ++total;
  }
  REQUIRE(total == 500);
  CHECK(static_cast<double>(agree) / total >= 0.98);
}

TEST_CASE("grid command reproduces the study numbers") {
  TempDir tmp;
  // write the fixed study dataset
  const Dataset data = contingency_dataset();
  const std::string data_csv = tmp.file("study.csv");
  write_dataset_csv(data, data_csv);

  json cfg;
  cfg["objective"] = "ig";
  cfg["coords"] = "group-logits";
  cfg["prior"] = {{"kind", "normal"}, {"sd", 10.0}};
  cfg["true_prevalence"] = {0.99, 0.01};
  cfg["grid"] = {{"axes",
                  {{{"lo", -10.0}, {"hi", 10.0}, {"points", 201}},
                   {{"lo", -10.0}, {"hi", 10.0}, {"points", 201}}}}};
  const std::string cfg_path = tmp.file("grid.json");
  write_json(cfg, cfg_path);

  const std::string prefix = tmp.file("post");
  REQUIRE(cli::run({"grid", "--config", cfg_path, "--data", data_csv,
                    "--out-prefix", prefix}) == 0);
  const json stats = read_json(prefix + ".json");
  CHECK(stats["frequentist"]["odds_ratio"].get<double>() ==
        doctest::Approx(2.1364).epsilon(1e-3));
  CHECK(stats["frequentist"]["woolf_sd"].get<double>() ==
        doctest::Approx(0.7376).epsilon(1e-3));
  const double mean = stats["log_odds_ratio"]["mean"].get<double>();
  const double sd = stats["log_odds_ratio"]["sd"].get<double>();
  CHECK(std::abs(mean - 0.76) < 0.30);
  CHECK(std::abs(sd - 0.74) < 0.25);
  CHECK(std::filesystem::exists(prefix + ".csv"));
}

TEST_CASE("gradient audit command reports success") {
  CHECK(cli::run({"gradcheck", "--seed", "5"}) == 0);
}
