#include "tglo/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tglo {

void AttackConfig::validate() const {
  if (epsilons.empty()) throw std::invalid_argument("attack needs at least one epsilon");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw std::invalid_argument("attack strengths must be non-negative");
  if (!std::is_sorted(epsilons.begin(), epsilons.end()))
    throw std::invalid_argument("attack strengths must be sorted ascending");
  if (clamp_range && !(clamp_range->first <= clamp_range->second))
    throw std::invalid_argument("clamp range is empty");
}

Eigen::VectorXd fgsm_perturb(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& grad,
                             double epsilon, std::pair<double, double> clamp_range) {
  if (x.size() != grad.size()) throw std::invalid_argument("gradient and input dimensions differ");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("attack strength must be non-negative");
  if (epsilon == 0.0) return x;
  const Eigen::ArrayXd sign = (grad.array() > 0).cast<double>() - (grad.array() < 0).cast<double>();
  Eigen::VectorXd adv = (x.array() + epsilon * sign).max(clamp_range.first).min(clamp_range.second).matrix();
  // x + eps can round one ulp past the ball, and clamping an input that lies
  // outside the range can move it further; the ball takes precedence.
  for (Eigen::Index i = 0; i < adv.size(); ++i) {
    if (std::abs(adv(i) - x(i)) <= epsilon) continue;
    double v = adv(i) > x(i) ? x(i) + epsilon : x(i) - epsilon;
    while (std::abs(v - x(i)) > epsilon) v = std::nextafter(v, x(i));
    adv(i) = v;
  }
  return adv;
}

double adversarial_accuracy(const Network& net, const Dataset& data, const LossSpec& loss, double epsilon,
                            std::pair<double, double> clamp_range) {
  if (data.size() == 0) return 0.0;
  if (epsilon == 0.0) return accuracy(net, data);
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const int label = data.labels[i];
    const Eigen::VectorXd grad = input_gradient(net, data.sample(i), label, loss);
    correct += net.classify(fgsm_perturb(data.sample(i), grad, epsilon, clamp_range)) == label;
  }
  return double(correct) / data.size();
}

std::vector<SweepPoint> robustness_sweep(const Network& net, const Dataset& data, const LossSpec& loss,
                                         const AttackConfig& attack) {
  attack.validate();
  data.validate();
  const auto range = attack.clamp_range.value_or(data.feature_range());
  std::vector<SweepPoint> out;
  out.reserve(attack.epsilons.size());
  for (double e : attack.epsilons) out.push_back({e, adversarial_accuracy(net, data, loss, e, range)});
  return out;
}

double adversarial_fitness(const LossParamsd& params, const DatasetSplit& split, const EvalBudget& budget,
                           double epsilon_star) {
  const LossSpec loss = LossSpec::taylor(params);
  TrainResult trained = train(make_network(split.train, budget), split.train, loss, budget.train);
  if (trained.log.diverged) return 0.0;
  const auto [tlo, thi] = split.train.feature_range();
  const auto [vlo, vhi] = split.validation.feature_range();
  return adversarial_accuracy(trained.net, split.validation, loss, epsilon_star,
                              {std::min(tlo, vlo), std::max(thi, vhi)});
}

}  // namespace tglo
