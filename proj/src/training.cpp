#include "tglo/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tglo {

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(logit_floor > 0.0)) throw std::invalid_argument("logit floor must be positive");
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) correct += net.classify(data.sample(i)) == data.labels[i];
  return double(correct) / data.size();
}

TrainResult train(Network net, const Dataset& data, const LossSpec& loss, const TrainConfig& config) {
  config.validate();
  data.validate();
  if (data.n_classes != net.output_size()) throw std::invalid_argument("network outputs do not match class count");

  LossSpec rule = loss;
  rule.logit_floor = config.logit_floor;

  RunLog log;
  log.initial_accuracy = accuracy(net, data);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.rng_seed);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int aborted = 0;
    for (int i : order) {
      const int label = data.labels[i];
      const StepResult step = decomposed_step(net, data.sample(i), label, rule, config.eta);
      if (!step.applied) ++aborted;
      if (config.log_per_sample) {
        const double target = step.output(label);
        log.sample_logits.push_back(
            {epoch, i, net.output_size(), target, (step.output.sum() - target) / (net.output_size() - 1)});
      }
    }
    log.aborted_steps.push_back(aborted);
    log.epoch_accuracy.push_back(accuracy(net, data));
    log.epochs_run = epoch;
    if (aborted == data.size()) {
      log.diverged = true;
      break;
    }
  }
  return {std::move(net), std::move(log)};
}

Network make_network(const Dataset& data, const EvalBudget& budget) {
  std::vector<int> sizes{data.dim()};
  sizes.insert(sizes.end(), budget.hidden.begin(), budget.hidden.end());
  sizes.push_back(data.n_classes);
  return Network::random(sizes, budget.init_seed);
}

}  // namespace tglo
