#include "tglo/experiment.hpp"

#include "tglo/adversarial.hpp"
#include "tglo/dynamics.hpp"
#include "tglo/evolution.hpp"
#include "tglo/invariant.hpp"
#include "tglo/loss_spec.hpp"
#include "tglo/serialization.hpp"
#include "tglo/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tglo {

using nlohmann::json;

namespace {

json header(const char* command, const json& spec) {
  return {{"format_version", kFormatVersion}, {"command", command}, {"spec", spec}};
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * (1.0 + std::abs(b)); }

GammaCoeffsd resolve_coeffs(const std::optional<LossParamsd>& lambda, const std::optional<GammaCoeffsd>& coeffs,
                            int n, json& spec) {
  if (lambda.has_value() == coeffs.has_value()) throw UsageError("give exactly one of lambda or coeffs");
  if (n < 2) throw UsageError("class count must be at least 2");
  spec["n"] = n;
  if (lambda) {
    spec["lambda"] = *lambda;
    return expand_coeffs(*lambda);
  }
  if (!coeffs->all_finite()) throw UsageError("coefficients must be finite");
  spec["coeffs"] = *coeffs;
  return *coeffs;
}

TrainConfig resolve_train(json& spec, std::uint64_t seed) {
  json cfg = spec.value("train", json::object());
  if (!cfg.contains("rng_seed")) cfg["rng_seed"] = seed;
  TrainConfig train;
  try {
    train = cfg.get<TrainConfig>();
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid train config: ") + e.what());
  }
  spec["train"] = train;
  return train;
}

LossSpec resolve_loss(json& spec, const char* key, const std::string& fallback) {
  const std::string name = spec.value(key, fallback);
  LossSpec loss;
  try {
    loss = parse_loss(name);
    loss.label_smoothing = spec.value("label_smoothing", 0.0);
    if (loss.label_smoothing != 0.0) smoothed_targets(loss.label_smoothing, 2);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  spec[key] = name;
  spec["label_smoothing"] = loss.label_smoothing;
  return loss;
}

}  // namespace

Dataset load_dataset(json& spec, std::uint64_t default_seed) {
  if (!spec.is_object()) spec = json::object();
  const std::string kind = spec.value("kind", "blobs");
  spec["kind"] = kind;
  Dataset data;
  try {
    if (kind == "blobs") {
      spec["n_classes"] = spec.value("n_classes", 2);
      spec["samples_per_class"] = spec.value("samples_per_class", 100);
      spec["dim"] = spec.value("dim", 2);
      spec["spread"] = spec.value("spread", 0.3);
      spec["seed"] = spec.value("seed", default_seed);
      data = make_blobs(spec["n_classes"], spec["samples_per_class"], spec["dim"], spec["spread"],
                        spec["seed"].get<std::uint64_t>());
    } else if (kind == "idx") {
      if (!spec.contains("images") || !spec.contains("labels")) throw UsageError("idx dataset needs images and labels");
      spec["limit"] = spec.value("limit", 0);
      data = load_idx(spec["images"].get<std::string>(), spec["labels"].get<std::string>(), spec["limit"]);
    } else {
      throw UsageError("unknown dataset kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid dataset spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid dataset spec: ") + e.what());
  }
  data.validate();
  return data;
}

CommandOutput run_analyze(const AnalyzeRequest& request) {
  json spec = json::object();
  const GammaCoeffsd c = resolve_coeffs(request.lambda, request.coeffs, request.n, spec);
  const int n = request.n;

  CommandOutput out;
  json& doc = out.document = header("analyze", spec);
  doc["gamma_coeffs"] = c;

  const ZeroErrorCoeffsd zero = request.lambda ? zero_error_coeffs(*request.lambda) : zero_error_from_coeffs(c);
  doc["zero_error_coeffs"] = zero;
  doc["zero_error_gamma"] = {{"target", zero(1.0)}, {"nontarget", zero(0.0)}};

  const auto null_epoch = null_epoch_gamma(c, n);
  doc["null_epoch_gamma"] = {{"h", 1.0 / n}, {"target", null_epoch.target}, {"nontarget", null_epoch.nontarget}};

  const auto report = check_invariant(c, n);
  doc["invariant"] = report;

  GateVerdict verdict;
  if (request.lambda) {
    verdict = gate_candidate(*request.lambda, n);
  } else if (c == GammaCoeffsd{}) {
    verdict = GateVerdict::reject(kRejectDegenerate);
  } else if (report.violated) {
    verdict = GateVerdict::reject(kRejectInvariant);
  }
  doc["gate"] = {{"accepted", verdict.accepted}, {"reason", verdict.reason}};
  doc["trainable"] = verdict.accepted;

  json limit = json::array();
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const LogitState<double> s{eps, n, c(1.0 - eps, 1.0), c(eps / (n - 1), 0.0)};
    limit.push_back({{"epsilon", eps},
                     {"gamma_t", s.gamma_t},
                     {"gamma_not_t", s.gamma_not_t},
                     {"strength", entropy_reduction_strength(s)}});
  }
  doc["zero_error_limit"] = limit;

  json checks = json::object();
  bool ok = true;
  if (request.lambda) {
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i) {
      for (double y : {0.0, 1.0}) {
        const double h = i / 20.0;
        const double direct = gamma_taylor(*request.lambda, h, y);
        worst = std::max(worst, std::abs(direct - c(h, y)) / (1.0 + std::abs(direct)));
      }
    }
    checks["decomposition_max_rel_error"] = worst;
    ok = ok && worst <= 1e-9;
  }
  bool zero_ok = true;
  for (double y : {0.0, 1.0}) zero_ok = zero_ok && close(zero(y), c(y, y), 1e-9);
  checks["zero_error_consistent"] = zero_ok;
  ok = ok && zero_ok;
  checks["passed"] = ok;
  doc["self_checks"] = checks;
  out.checks_passed = ok;
  return out;
}

CommandOutput run_smooth(const SmoothRequest& request) {
  json spec = json::object();
  const GammaCoeffsd c = resolve_coeffs(request.lambda, request.coeffs, request.n, spec);
  spec["alpha"] = request.alpha;
  GammaCoeffsd smoothed;
  GammaPair<double> targets;
  try {
    targets = smoothed_targets(request.alpha, request.n);
    smoothed = smooth_coeffs(c, request.alpha, request.n);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  CommandOutput out;
  json& doc = out.document = header("smooth", spec);
  doc["gamma_coeffs"] = c;
  doc["smoothed_targets"] = {{"target", targets.target}, {"nontarget", targets.nontarget}};
  doc["smoothed_coeffs"] = smoothed;

  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double h = i / 20.0;
    const double on = c(h, targets.target), off = c(h, targets.nontarget);
    worst = std::max(worst, std::abs(on - smoothed(h, 1.0)) / (1.0 + std::abs(on)));
    worst = std::max(worst, std::abs(off - smoothed(h, 0.0)) / (1.0 + std::abs(off)));
  }
  out.checks_passed = worst <= 1e-9;
  doc["self_checks"] = {{"equivalence_max_rel_error", worst}, {"passed", out.checks_passed}};
  return out;
}

CommandOutput run_trace(json spec) {
  const std::uint64_t seed = spec.value("rng_seed", std::uint64_t{0});
  spec["rng_seed"] = seed;
  const Dataset data = load_dataset(spec["dataset"], seed);
  const LossSpec loss = resolve_loss(spec, "loss", "ce");

  EvalBudget budget;
  budget.hidden = spec.value("hidden", budget.hidden);
  budget.init_seed = spec.value("init_seed", seed);
  spec["hidden"] = budget.hidden;
  spec["init_seed"] = budget.init_seed;
  budget.train = resolve_train(spec, seed);
  budget.train.log_per_sample = true;
  spec["train"]["log_per_sample"] = true;

  TrainResult trained = train(make_network(data, budget), data, loss, budget.train);
  const auto trace = attraction_trace(trained.log.sample_logits, loss);

  CommandOutput out;
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  out.csv = csv.str();

  json& doc = out.document = header("trace", spec);
  doc["run_log"] = trained.log;
  doc["diverged"] = trained.log.diverged;
  json epochs = json::array();
  int positive = 0, counted = 0;
  for (const EpochSignSummary& s : summarize_trace(trace)) {
    epochs.push_back({{"epoch", s.epoch},
                      {"records", s.records},
                      {"boundary", s.boundary},
                      {"positive_fraction", s.positive_fraction()},
                      {"negative_fraction", s.negative_fraction()}});
    positive += s.positive;
    counted += s.records - s.boundary;
  }
  doc["per_epoch"] = epochs;
  doc["records"] = trace.size();
  doc["positive_fraction"] = counted ? double(positive) / counted : 0.0;
  if (spec.contains("model_out")) out.model = trained.net;
  return out;
}

CommandOutput run_search(json spec, const json* resume) {
  const std::uint64_t seed = spec.value("rng_seed", std::uint64_t{0});
  spec["rng_seed"] = seed;
  const Dataset data = load_dataset(spec["dataset"], seed);

  json cfg = spec.value("search", json::object());
  if (!cfg.contains("rng_seed")) cfg["rng_seed"] = seed;
  if (!cfg.contains("n")) cfg["n"] = data.n_classes;
  SearchConfig config;
  try {
    config = cfg.get<SearchConfig>();
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid search config: ") + e.what());
  }
  spec["search"] = config;

  SearchResult previous;
  if (resume) {
    try {
      json a = resume->at("spec"), b = spec;
      a["search"].erase("generations");
      b["search"].erase("generations");
      if (a != b) throw UsageError("checkpoint was produced by a different spec");
      previous = resume->at("result").get<SearchResult>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("invalid checkpoint: ") + e.what());
    }
  }

  const SearchResult result = search(config, data, {}, resume ? &previous : nullptr);
  CommandOutput out;
  json& doc = out.document = header("search", spec);
  doc["result"] = result;
  return out;
}

CommandOutput run_attack(json spec) {
  const std::uint64_t seed = spec.value("rng_seed", std::uint64_t{0});
  spec["rng_seed"] = seed;
  const Dataset data = load_dataset(spec["dataset"], seed);

  Network net;
  std::string trained_loss = "ce";
  try {
    if (spec.contains("model")) {
      json model = spec["model"];
      if (model.is_string()) {
        std::ifstream in(model.get<std::string>());
        if (!in) throw UsageError("cannot open model " + model.get<std::string>());
        model = json::parse(in);
      }
      net = model.get<Network>();
    } else if (spec.contains("train")) {
      json& t = spec["train"];
      trained_loss = t.value("loss", trained_loss);
      t["loss"] = trained_loss;
      const LossSpec loss = parse_loss(trained_loss);
      EvalBudget budget;
      budget.hidden = t.value("hidden", budget.hidden);
      budget.init_seed = t.value("init_seed", seed);
      t["hidden"] = budget.hidden;
      t["init_seed"] = budget.init_seed;
      budget.train = resolve_train(t, seed);
      net = train(make_network(data, budget), data, loss, budget.train).net;
    } else {
      throw UsageError("attack needs a model checkpoint or a train spec");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid model: ") + e.what());
  }
  if (net.input_size() != data.dim() || net.output_size() != data.n_classes)
    throw UsageError("model shape does not match dataset");

  const LossSpec attack_loss = resolve_loss(spec, "attack_loss", trained_loss);
  AttackConfig attack;
  attack.epsilons = spec.value("epsilons", std::vector<double>{0.0, 0.05, 0.1, 0.2, 0.3});
  spec["epsilons"] = attack.epsilons;
  if (spec.contains("clamp_range")) {
    const auto r = spec["clamp_range"].get<std::vector<double>>();
    if (r.size() != 2) throw UsageError("clamp_range needs [lo, hi]");
    attack.clamp_range = std::pair{r[0], r[1]};
  }
  try {
    attack.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto sweep = robustness_sweep(net, data, attack_loss, attack);
  const double clean = accuracy(net, data);
  CommandOutput out;
  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  out.csv = csv.str();
  json& doc = out.document = header("attack", spec);
  doc["clean_accuracy"] = clean;
  doc["sweep"] = sweep;
  bool ok = true;
  for (const SweepPoint& p : sweep)
    if (p.epsilon == 0.0) ok = ok && p.accuracy == clean;
  out.checks_passed = ok;
  doc["self_checks"] = {{"zero_epsilon_matches_clean", ok}, {"passed", ok}};
  return out;
}

}  // namespace tglo
