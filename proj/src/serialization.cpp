#include "tglo/serialization.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tglo {

using nlohmann::json;

void to_json(json& j, const LossParamsd& p) {
  j = json::array();
  for (int i = 0; i < 8; ++i) j.push_back(p[i]);
}

void from_json(const json& j, LossParamsd& p) {
  if (!j.is_array() || j.size() != 8) throw std::invalid_argument("LossParams must be a JSON array of 8 numbers");
  LossParamsd::Vector v;
  for (int i = 0; i < 8; ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("LossParams entries must be numbers");
    v(i) = j[i].get<double>();
  }
  p = LossParamsd(v);
}

void to_json(json& j, const GammaCoeffsd& c) {
  j = {{"c1", c.c1}, {"ch", c.ch}, {"chh", c.chh}, {"chy", c.chy}, {"cy", c.cy}, {"cyy", c.cyy}};
}

void from_json(const json& j, GammaCoeffsd& c) {
  c.c1 = j.at("c1").get<double>();
  c.ch = j.at("ch").get<double>();
  c.chh = j.at("chh").get<double>();
  c.chy = j.at("chy").get<double>();
  c.cy = j.at("cy").get<double>();
  c.cyy = j.at("cyy").get<double>();
  if (!c.all_finite()) throw std::invalid_argument("GammaCoeffs entries must be finite");
}

void to_json(json& j, const ZeroErrorCoeffsd& z) { j = {{"a", z.a}, {"b", z.b}, {"c", z.c}}; }

void to_json(json& j, const InvariantReport<double>& r) {
  j = {{"constraint1_lhs", r.constraint1_lhs}, {"constraint1_rhs", r.constraint1_rhs},
       {"constraint2_lhs", r.constraint2_lhs}, {"constraint2_rhs", r.constraint2_rhs},
       {"violated", r.violated},               {"margin", r.margin}};
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"eta", c.eta},
       {"epochs", c.epochs},
       {"rng_seed", c.rng_seed},
       {"logit_floor", c.logit_floor},
       {"log_per_sample", c.log_per_sample}};
}

void from_json(const json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.eta = j.value("eta", c.eta);
  c.epochs = j.value("epochs", c.epochs);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.logit_floor = j.value("logit_floor", c.logit_floor);
  c.log_per_sample = j.value("log_per_sample", c.log_per_sample);
  c.validate();
}

void to_json(json& j, const EvalBudget& b) {
  j = {{"hidden", b.hidden}, {"init_seed", b.init_seed}, {"train", b.train}};
}

void from_json(const json& j, EvalBudget& b) {
  b = EvalBudget{};
  b.hidden = j.value("hidden", b.hidden);
  b.init_seed = j.value("init_seed", b.init_seed);
  if (j.contains("train")) b.train = j.at("train").get<TrainConfig>();
}

void to_json(json& j, const RunLog& log) {
  j = {{"initial_accuracy", log.initial_accuracy},
       {"epoch_accuracy", log.epoch_accuracy},
       {"aborted_steps", log.aborted_steps},
       {"epochs_run", log.epochs_run},
       {"diverged", log.diverged}};
}

namespace {

const char* metric_name(FitnessMetric m) {
  return m == FitnessMetric::validation_accuracy ? "validation_accuracy" : "adversarial_accuracy";
}

FitnessMetric parse_metric(const std::string& s) {
  if (s == "validation_accuracy") return FitnessMetric::validation_accuracy;
  if (s == "adversarial_accuracy") return FitnessMetric::adversarial_accuracy;
  throw std::invalid_argument("unknown fitness metric '" + s + "'");
}

}  // namespace

void to_json(json& j, const SearchConfig& c) {
  j = {{"population_size", c.population_size},
       {"generations", c.generations},
       {"use_invariant", c.use_invariant},
       {"sigma0", c.sigma0},
       {"eval_budget", c.eval_budget},
       {"fitness_metric", metric_name(c.fitness_metric)},
       {"epsilon_star", c.epsilon_star},
       {"rng_seed", c.rng_seed},
       {"n", c.n},
       {"train_fraction", c.train_fraction},
       {"max_evaluations", c.max_evaluations},
       {"strategy", c.strategy}};
}

void from_json(const json& j, SearchConfig& c) {
  c = SearchConfig{};
  c.use_invariant = j.value("use_invariant", c.use_invariant);
  // Doubled population is the default once the gate is on.
  c.population_size = j.value("population_size", c.use_invariant ? 40 : 20);
  c.generations = j.value("generations", c.generations);
  c.sigma0 = j.value("sigma0", c.sigma0);
  if (j.contains("eval_budget")) c.eval_budget = j.at("eval_budget").get<EvalBudget>();
  c.fitness_metric = parse_metric(j.value("fitness_metric", std::string(metric_name(c.fitness_metric))));
  c.epsilon_star = j.value("epsilon_star", c.epsilon_star);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.n = j.value("n", c.n);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
  c.strategy = j.value("strategy", c.strategy);
  c.validate();
}

void to_json(json& j, const Candidate& c) {
  j = {{"params", c.params},         {"fitness", c.fitness},       {"gated", c.gated},
       {"diverged", c.diverged},     {"unevaluated", c.unevaluated}, {"generation", c.generation},
       {"epochs_trained", c.epochs_trained}, {"reason", c.reason}};
}

void from_json(const json& j, Candidate& c) {
  c.params = j.at("params").get<LossParamsd>();
  c.fitness = j.at("fitness").get<double>();
  c.gated = j.at("gated").get<bool>();
  c.diverged = j.value("diverged", false);
  c.unevaluated = j.value("unevaluated", false);
  c.generation = j.at("generation").get<int>();
  c.epochs_trained = j.value("epochs_trained", 0);
  c.reason = j.value("reason", std::string());
}

void to_json(json& j, const SearchResult& r) {
  json gens = json::array();
  for (const GenerationRecord& g : r.history) {
    gens.push_back({{"generation", g.generation},
                    {"best_fitness", g.best_fitness},
                    {"evaluations", g.evaluations},
                    {"candidates", g.candidates}});
  }
  j = {{"best", r.best},
       {"per_generation", gens},
       {"evaluations", r.evaluations},
       {"budget_exhausted", r.budget_exhausted},
       {"strategy_state", r.strategy_state}};
}

void from_json(const json& j, SearchResult& r) {
  r = SearchResult{};
  r.best = j.at("best").get<Candidate>();
  for (const json& g : j.at("per_generation")) {
    GenerationRecord rec;
    rec.generation = g.at("generation").get<int>();
    rec.best_fitness = g.at("best_fitness").get<double>();
    rec.evaluations = g.at("evaluations").get<int>();
    rec.candidates = g.at("candidates").get<std::vector<Candidate>>();
    r.history.push_back(std::move(rec));
  }
  r.evaluations = j.at("evaluations").get<int>();
  r.budget_exhausted = j.at("budget_exhausted").get<bool>();
  r.strategy_state = j.at("strategy_state");
}

void to_json(json& j, const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"weights", std::vector<double>(l.weights.data(), l.weights.data() + l.weights.size())},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  j = {{"layer_sizes", net.layer_sizes()}, {"layers", layers}};
}

void from_json(const json& j, Network& net) {
  Network out(j.at("layer_sizes").get<std::vector<int>>());
  const json& layers = j.at("layers");
  if (layers.size() != out.layers().size()) throw std::invalid_argument("checkpoint layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& dst = out.layers()[l];
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    const auto b = layers[l].at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != dst.weights.size() ||
        static_cast<Eigen::Index>(b.size()) != dst.bias.size())
      throw std::invalid_argument("checkpoint layer shape mismatch");
    dst.weights = Eigen::Map<const Eigen::MatrixXd>(w.data(), dst.weights.rows(), dst.weights.cols());
    dst.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), dst.bias.size());
  }
  net = std::move(out);
}

void to_json(json& j, const SweepPoint& p) { j = {{"epsilon", p.epsilon}, {"accuracy", p.accuracy}}; }

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> sweep) {
  os << "epsilon,accuracy\n";
  char buf[80];
  for (const SweepPoint& p : sweep) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.epsilon, p.accuracy);
    os << buf;
  }
}

}  // namespace tglo
