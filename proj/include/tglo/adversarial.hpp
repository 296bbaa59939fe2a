#pragma once

// Single-step gradient-sign (FGSM) attacks against the network's own
// training loss.

#include "tglo/dataset.hpp"
#include "tglo/loss_spec.hpp"
#include "tglo/network.hpp"
#include "tglo/training.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace tglo {

struct AttackConfig {
  std::vector<double> epsilons{0.0};
  /// Perturbed features are clamped here; defaults to the dataset's range.
  std::optional<std::pair<double, double>> clamp_range;

  void validate() const;
};

/// clamp(x + eps * sign(grad)) with sign(0) = 0. eps == 0 returns x unchanged.
Eigen::VectorXd fgsm_perturb(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& grad,
                             double epsilon, std::pair<double, double> clamp_range);

/// Accuracy on `data` after attacking every sample at strength `epsilon`.
/// Gradients come from `net` itself on the clean inputs.
double adversarial_accuracy(const Network& net, const Dataset& data, const LossSpec& loss, double epsilon,
                            std::pair<double, double> clamp_range);

struct SweepPoint {
  double epsilon = 0;
  double accuracy = 0;
};

std::vector<SweepPoint> robustness_sweep(const Network& net, const Dataset& data, const LossSpec& loss,
                                         const AttackConfig& attack);

/// Trains a Taylor loss on split.train, then returns validation accuracy under
/// an attack of strength epsilon_star. Divergent training scores 0.
double adversarial_fitness(const LossParamsd& params, const DatasetSplit& split, const EvalBudget& budget,
                           double epsilon_star);

}  // namespace tglo
