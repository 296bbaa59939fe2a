#pragma once

// Evolutionary search over Taylor loss parameters. Candidates that fail the
// trainability gate are scored zero without training.

#include "tglo/cma_es.hpp"
#include "tglo/dataset.hpp"
#include "tglo/invariant.hpp"
#include "tglo/loss_core.hpp"
#include "tglo/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tglo {

enum class FitnessMetric { validation_accuracy, adversarial_accuracy };

struct SearchConfig {
  int population_size = 20;
  int generations = 10;
  bool use_invariant = false;
  double sigma0 = 0.5;
  EvalBudget eval_budget;
  FitnessMetric fitness_metric = FitnessMetric::validation_accuracy;
  double epsilon_star = 0.0;  ///< attack strength for adversarial fitness
  std::uint64_t rng_seed = 0;
  int n = 2;  ///< class count used by the gate
  double train_fraction = 0.8;
  /// Cap on candidates actually trained (gated ones are free); 0 = no cap.
  int max_evaluations = 0;
  std::string strategy = "cma";

  void validate() const;
};

struct Candidate {
  LossParamsd params;
  double fitness = 0;
  bool gated = false;
  bool diverged = false;
  /// Left out because the evaluation cap was reached.
  bool unevaluated = false;
  int generation = 0;
  int epochs_trained = 0;
  std::string reason;
};

struct GenerationRecord {
  int generation = 0;
  std::vector<Candidate> candidates;
  double best_fitness = 0;  ///< best seen up to and including this generation
  int evaluations = 0;      ///< trained candidates up to and including this generation
};

struct SearchResult {
  Candidate best;
  std::vector<GenerationRecord> history;
  int evaluations = 0;
  bool budget_exhausted = false;
  nlohmann::json strategy_state;
};

/// Replaces the default trainability gate, e.g. to force rejections.
using CandidateGate = std::function<GateVerdict(const LossParamsd&, int n)>;

Candidate evaluate_candidate(const LossParamsd& params, const DatasetSplit& split, const EvalBudget& budget,
                             bool use_invariant, int n, FitnessMetric metric = FitnessMetric::validation_accuracy,
                             double epsilon_star = 0.0, const CandidateGate& gate = {});

/// Runs config.generations generations (or until the evaluation cap). When
/// `resume` is given, its history and strategy state are continued.
SearchResult search(const SearchConfig& config, const Dataset& data, const CandidateGate& gate = {},
                    const SearchResult* resume = nullptr);

}  // namespace tglo
