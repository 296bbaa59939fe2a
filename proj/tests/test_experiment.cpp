#include "support.hpp"

#include "tglo/experiment.hpp"
#include "tglo/serialization.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace tglo;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / ("tglo_cli_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

// Runs the CLI, capturing stdout into `out`; returns the exit status.
int cli(const std::string& args, std::string* out = nullptr) {
  const std::string capture = (std::filesystem::temp_directory_path() / "tglo_cli_stdout").string();
  const std::string cmd = std::string(TGLO_CLI_PATH) + " " + args + " > " + capture + " 2> /dev/null";
  const int raw = std::system(cmd.c_str());
  if (out) *out = slurp(capture);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("serialization round trips") {
  oracle::Rng rng(61);
  const LossParamsd p = rng.lambda();
  CHECK(json(p).get<LossParamsd>() == p);
  const GammaCoeffsd c = rng.coeffs();
  CHECK(json(c).get<GammaCoeffsd>() == c);
  CHECK_THROWS_AS(json::array({1, 2}).get<LossParamsd>(), std::invalid_argument);
  CHECK_THROWS_AS(json::array({1, 2, 3, 4, 5, 6, 7, "x"}).get<LossParamsd>(), std::invalid_argument);

  const Network net = Network::random({3, 4, 2}, 2);
  CHECK(json(net).get<Network>() == net);
  json broken = net;
  broken["layers"][0]["bias"] = json::array({1.0});
  CHECK_THROWS_AS(broken.get<Network>(), std::invalid_argument);

  SearchConfig cfg;
  cfg.use_invariant = true;
  cfg.fitness_metric = FitnessMetric::adversarial_accuracy;
  cfg.epsilon_star = 0.1;
  const SearchConfig back = json(cfg).get<SearchConfig>();
  CHECK(json(back) == json(cfg));
  CHECK(json::object({{"use_invariant", true}}).get<SearchConfig>().population_size == 40);
  CHECK(json::object().get<SearchConfig>().population_size == 20);
  CHECK_THROWS_AS(json::object({{"fitness_metric", "speed"}}).get<SearchConfig>(), std::invalid_argument);

  std::ostringstream os;
  const std::vector<SweepPoint> sweep{{0.0, 1.0}, {0.1, 0.75}};
  write_sweep_csv(os, sweep);
  CHECK(os.str() == "epsilon,accuracy\n0,1\n0.1,0.75\n");
}

TEST_CASE("analyze reports") {
  AnalyzeRequest mse;
  mse.lambda = mse_taylor_params();
  const auto out = run_analyze(mse);
  CHECK(out.checks_passed);
  CHECK(out.document["format_version"] == kFormatVersion);
  CHECK(out.document["spec"]["n"] == 10);
  CHECK(out.document["trainable"] == true);
  CHECK(out.document["zero_error_gamma"]["target"] == 0.0);
  CHECK(out.document["zero_error_gamma"]["nontarget"] == 0.0);
  CHECK(out.document["zero_error_limit"].size() == 3);

  AnalyzeRequest zero;
  zero.lambda = LossParamsd{};
  const auto z = run_analyze(zero);
  CHECK(z.document["gate"]["accepted"] == false);
  CHECK(z.document["gate"]["reason"] == kRejectDegenerate);

  AnalyzeRequest published;
  published.coeffs = kAllCnnNullEpochCoeffs;
  const auto pub = run_analyze(published);
  CHECK(pub.document["null_epoch_gamma"]["target"].get<double>() == doctest::Approx(-385.729923).epsilon(1e-9));
  CHECK(pub.document["null_epoch_gamma"]["nontarget"].get<double>() == doctest::Approx(-387.055588).epsilon(1e-9));

  AnalyzeRequest both = mse;
  both.coeffs = GammaCoeffsd{};
  CHECK_THROWS_AS(run_analyze(both), UsageError);
  CHECK_THROWS_AS(run_analyze(AnalyzeRequest{}), UsageError);
  mse.n = 1;
  CHECK_THROWS_AS(run_analyze(mse), UsageError);
}

TEST_CASE("smooth command") {
  SmoothRequest r;
  r.coeffs = GammaCoeffsd{0.5, -1, 2, 3, -4, 1.5};
  r.alpha = 0.1;
  const auto out = run_smooth(r);
  CHECK(out.checks_passed);
  CHECK(out.document["smoothed_coeffs"].get<GammaCoeffsd>() == smooth_coeffs(*r.coeffs, 0.1, 10));
  r.alpha = 1.5;
  CHECK_THROWS_AS(run_smooth(r), UsageError);
}

TEST_CASE("trace command") {
  json spec = {{"rng_seed", 5}, {"loss", "ce"}, {"train", {{"epochs", 4}}}};
  const auto a = run_trace(spec);
  CHECK(a.document["positive_fraction"] == 1.0);
  CHECK(a.document["per_epoch"].size() == 4);
  CHECK(a.document["spec"]["dataset"]["kind"] == "blobs");
  CHECK(a.document["spec"]["train"]["log_per_sample"] == true);
  CHECK(a.csv == run_trace(spec).csv);

  spec["loss"] = "zero";
  const auto z = run_trace(spec);
  for (const auto& e : z.document["per_epoch"]) CHECK(e["positive_fraction"] == 0.0);

  spec["loss"] = "taylor:0,0,0,0,1e308,0,0,0";
  const auto d = run_trace(spec);
  CHECK(d.document["diverged"] == true);

  spec["loss"] = "hinge";
  CHECK_THROWS_AS(run_trace(spec), UsageError);
  spec["loss"] = "ce";
  spec["dataset"] = {{"kind", "csv"}};
  CHECK_THROWS_AS(run_trace(spec), UsageError);
}

TEST_CASE("attack command") {
  json spec = {{"rng_seed", 2}, {"train", {{"loss", "ce"}, {"epochs", 5}}}};
  const auto out = run_attack(spec);
  CHECK(out.checks_passed);
  CHECK(out.document["sweep"][0]["accuracy"] == out.document["clean_accuracy"]);
  CHECK(out.document["spec"]["attack_loss"] == "ce");
  CHECK_THROWS_AS(run_attack(json{{"rng_seed", 2}}), UsageError);
  spec["epsilons"] = {0.2, 0.1};
  CHECK_THROWS_AS(run_attack(spec), UsageError);
}

TEST_CASE("search command embeds its resolved spec") {
  const json spec = {{"rng_seed", 4},
                     {"dataset", {{"samples_per_class", 20}}},
                     {"search", {{"population_size", 4}, {"generations", 2}, {"eval_budget", {{"train", {{"epochs", 2}}}}}}}};
  const auto out = run_search(spec);
  CHECK(out.document["spec"]["search"]["n"] == 2);
  CHECK(out.document["spec"]["search"]["rng_seed"] == 4);
  CHECK(out.document["result"]["per_generation"].size() == 2);

  json longer = spec;
  longer["search"]["generations"] = 3;
  const auto resumed = run_search(longer, &out.document);
  CHECK(resumed.document == run_search(longer).document);

  json other = spec;
  other["rng_seed"] = 5;
  CHECK_THROWS_AS(run_search(other, &out.document), UsageError);
  json bad = spec;
  bad["search"]["population_size"] = 2;
  CHECK_THROWS_AS(run_search(bad), UsageError);
}

TEST_CASE("CLI exit codes and outputs") {
  const TempDir tmp("exit");
  std::string out;
  CHECK(cli("analyze --lambda 0,0,0,-1,0,2,0,0 --n 10", &out) == 0);
  CHECK(json::parse(out)["trainable"] == true);

  CHECK(cli("analyze --lambda 1,2,3") == 2);
  CHECK(cli("analyze --lambda 0,0,0,-1,0,2,0,x") == 2);
  CHECK(cli("analyze") == 2);
  CHECK(cli("analyze --coeffs=-373.917,-130.264,-11.2188,-1.206,1.446265,0 --n 10", &out) == 0);
  CHECK(json::parse(out)["null_epoch_gamma"]["target"].get<double>() == doctest::Approx(-385.729923));
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("") == 2);

  CHECK(cli("smooth --lambda 0,0,0,-1,0,2,0,0 --alpha 0.1 --n 10", &out) == 0);
  CHECK(json::parse(out)["self_checks"]["passed"] == true);
  CHECK(cli("smooth --lambda 0,0,0,-1,0,2,0,0 --alpha 1.5") == 2);

  const std::string spec = tmp.file("trace.json");
  spit(spec, json{{"rng_seed", 3}, {"train", {{"epochs", 3}}}, {"model_out", tmp.file("model.json")}}.dump());
  CHECK(cli("trace --spec " + spec + " --out " + tmp.file("a.csv"), &out) == 0);
  CHECK(json::parse(out)["positive_fraction"] == 1.0);
  CHECK(cli("trace --spec " + spec + " --out " + tmp.file("b.csv")) == 0);
  CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
  CHECK(cli("trace --spec " + spec + " --seed 4 --out " + tmp.file("c.csv")) == 0);
  CHECK(slurp(tmp.file("a.csv")) != slurp(tmp.file("c.csv")));
  CHECK(std::filesystem::exists(tmp.file("model.json")));

  const std::string attack = tmp.file("attack.json");
  spit(attack, json{{"rng_seed", 3}, {"model", tmp.file("model.json")}}.dump());
  CHECK(cli("attack --spec " + attack + " --out " + tmp.file("sweep.csv"), &out) == 0);
  CHECK(slurp(tmp.file("sweep.csv")).rfind("epsilon,accuracy\n0,", 0) == 0);
  spit(attack, json{{"rng_seed", 3}}.dump());
  CHECK(cli("attack --spec " + attack) == 2);

  const std::string search = tmp.file("search.json");
  spit(search, json{{"rng_seed", 1},
                    {"dataset", {{"samples_per_class", 20}}},
                    {"search", {{"population_size", 4}, {"generations", 1}, {"eval_budget", {{"train", {{"epochs", 2}}}}}}}}
                   .dump());
  CHECK(cli("search --spec " + search + " --out " + tmp.file("s1.json")) == 0);
  CHECK(json::parse(slurp(tmp.file("s1.json")))["format_version"] == kFormatVersion);
  CHECK(cli("search --spec " + search + " --resume " + tmp.file("s1.json") + " --out " + tmp.file("s2.json")) == 0);

  spit(tmp.file("broken.json"), "{not json");
  CHECK(cli("trace --spec " + tmp.file("broken.json")) == 2);
  CHECK(cli("trace --spec " + tmp.file("missing.json")) == 2);
}
