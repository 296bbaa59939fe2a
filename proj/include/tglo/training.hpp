#pragma once

#include "tglo/dataset.hpp"
#include "tglo/dynamics.hpp"
#include "tglo/loss_spec.hpp"
#include "tglo/network.hpp"

#include <cstdint>
#include <vector>

namespace tglo {

struct TrainConfig {
  double eta = 0.1;
  int epochs = 20;
  std::uint64_t rng_seed = 0;  ///< sample order
  double logit_floor = kDefaultLogitFloor;
  bool log_per_sample = false;

  void validate() const;
};

struct RunLog {
  double initial_accuracy = 0;
  std::vector<double> epoch_accuracy;  ///< training accuracy after each epoch
  std::vector<int> aborted_steps;      ///< skipped samples per epoch
  int epochs_run = 0;
  bool diverged = false;
  /// Scaled logits each sample presented to the rule, when log_per_sample.
  std::vector<SampleLogit> sample_logits;
};

struct TrainResult {
  Network net;
  RunLog log;
};

double accuracy(const Network& net, const Dataset& data);

/// Per-sample SGD with the decomposed rule. Stops early and sets
/// RunLog::diverged if every step of an epoch had to be skipped.
TrainResult train(Network net, const Dataset& data, const LossSpec& loss, const TrainConfig& config);

/// Architecture and training budget shared by every candidate of a search.
struct EvalBudget {
  std::vector<int> hidden{8};
  std::uint64_t init_seed = 0;
  TrainConfig train;
};

/// Network shaped for `data` (input dim, hidden..., n_classes), seeded from
/// budget.init_seed.
Network make_network(const Dataset& data, const EvalBudget& budget);

}  // namespace tglo
