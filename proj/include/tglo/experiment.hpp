#pragma once

// Reproducible experiment commands. Each takes a JSON spec, resolves every
// default into it, and returns documents that embed the resolved spec.

#include "tglo/dataset.hpp"
#include "tglo/loss_core.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace tglo {

/// Malformed command input; the CLI maps it to a usage exit code.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CommandOutput {
  nlohmann::json document;
  /// CSV payload for trace/attack; empty otherwise.
  std::string csv;
  /// Trained network checkpoint, when the request asked for one.
  std::optional<nlohmann::json> model;
  bool checks_passed = true;
};

/// {"kind": "blobs", n_classes, samples_per_class, dim, spread, seed} or
/// {"kind": "idx", images, labels, limit}. Fills defaults into `spec`.
Dataset load_dataset(nlohmann::json& spec, std::uint64_t default_seed);

/// Exactly one of lambda / coeffs must be set.
struct AnalyzeRequest {
  std::optional<LossParamsd> lambda;
  std::optional<GammaCoeffsd> coeffs;
  int n = 10;
};

CommandOutput run_analyze(const AnalyzeRequest& request);

struct SmoothRequest {
  std::optional<LossParamsd> lambda;
  std::optional<GammaCoeffsd> coeffs;
  double alpha = 0.1;
  int n = 10;
};

CommandOutput run_smooth(const SmoothRequest& request);

/// spec: {rng_seed, dataset, loss, label_smoothing, hidden, init_seed, train,
/// model_out}
CommandOutput run_trace(nlohmann::json spec);

/// spec: {rng_seed, dataset, search: SearchConfig}. `resume` is a previous
/// output document of this command.
CommandOutput run_search(nlohmann::json spec, const nlohmann::json* resume = nullptr);

/// spec: {rng_seed, dataset, model | train, epsilons, attack_loss, clamp_range}
CommandOutput run_attack(nlohmann::json spec);

}  // namespace tglo
