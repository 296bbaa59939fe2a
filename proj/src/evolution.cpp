#include "tglo/evolution.hpp"

#include "tglo/adversarial.hpp"

#include <stdexcept>

namespace tglo {

void SearchConfig::validate() const {
  if (population_size < 4) throw std::invalid_argument("population size must be at least 4");
  if (generations < 1) throw std::invalid_argument("generations must be at least 1");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (!(epsilon_star >= 0.0)) throw std::invalid_argument("epsilon_star must be non-negative");
  if (max_evaluations < 0) throw std::invalid_argument("max_evaluations must be non-negative");
  require_class_count(n);
  eval_budget.train.validate();
}

Candidate evaluate_candidate(const LossParamsd& params, const DatasetSplit& split, const EvalBudget& budget,
                             bool use_invariant, int n, FitnessMetric metric, double epsilon_star,
                             const CandidateGate& gate) {
  Candidate c;
  c.params = params;
  if (use_invariant) {
    const GateVerdict verdict = gate ? gate(params, n) : gate_candidate(params, n);
    if (!verdict) {
      c.gated = true;
      c.reason = verdict.reason;
      return c;
    }
  }

  const LossSpec loss = LossSpec::taylor(params);
  TrainResult trained = train(make_network(split.train, budget), split.train, loss, budget.train);
  c.epochs_trained = trained.log.epochs_run;
  if (trained.log.diverged) {
    c.diverged = true;
    c.reason = "training diverged";
    return c;
  }
  if (metric == FitnessMetric::validation_accuracy || epsilon_star == 0.0) {
    c.fitness = accuracy(trained.net, split.validation);
  } else {
    const auto [tlo, thi] = split.train.feature_range();
    const auto [vlo, vhi] = split.validation.feature_range();
    c.fitness = adversarial_accuracy(trained.net, split.validation, loss, epsilon_star,
                                     {std::min(tlo, vlo), std::max(thi, vhi)});
  }
  return c;
}

SearchResult search(const SearchConfig& config, const Dataset& data, const CandidateGate& gate,
                    const SearchResult* resume) {
  config.validate();
  const DatasetSplit split = split_dataset(data, config.train_fraction, config.rng_seed);

  CmaOptions options;
  options.population = config.population_size;
  options.sigma0 = config.sigma0;
  options.seed = config.rng_seed;
  auto strategy = make_strategy(config.strategy, Eigen::VectorXd::Zero(8), options);

  SearchResult result;
  result.best.fitness = -1.0;
  if (resume) {
    result = *resume;
    strategy->load(resume->strategy_state);
  }

  const int first = static_cast<int>(result.history.size());
  for (int g = first; g < config.generations && !result.budget_exhausted; ++g) {
    const std::vector<Eigen::VectorXd> points = strategy->ask();
    GenerationRecord record;
    record.generation = g;
    std::vector<double> costs;
    costs.reserve(points.size());

    for (const Eigen::VectorXd& point : points) {
      const LossParamsd params{LossParamsd::Vector(point)};
      Candidate c;
      if (result.budget_exhausted) {
        c.params = params;
        c.unevaluated = true;
        c.generation = g;
      } else {
        c = evaluate_candidate(params, split, config.eval_budget, config.use_invariant, config.n,
                               config.fitness_metric, config.epsilon_star, gate);
        c.generation = g;
        if (!c.gated) ++result.evaluations;
        if (config.max_evaluations > 0 && result.evaluations >= config.max_evaluations)
          result.budget_exhausted = true;
        if (c.fitness > result.best.fitness) result.best = c;
      }
      costs.push_back(-c.fitness);
      record.candidates.push_back(std::move(c));
    }

    record.best_fitness = result.best.fitness;
    record.evaluations = result.evaluations;
    result.history.push_back(std::move(record));
    if (!result.budget_exhausted) strategy->tell(points, costs);
  }
  result.strategy_state = strategy->save();
  return result;
}

}  // namespace tglo
