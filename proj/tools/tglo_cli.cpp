// Command-line front end for the loss-dynamics laboratory.
//
// Exit codes: 0 success, 1 runtime failure or failed self-check, 2 usage error.

#include "tglo/experiment.hpp"
#include "tglo/loss_spec.hpp"
#include "tglo/serialization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using tglo::UsageError;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string spec_path;
  std::string out_path;
  std::string resume_path;
  std::optional<std::uint64_t> seed;
  std::string lambda;
  std::string coeffs;
  std::optional<int> n;
  std::optional<double> alpha;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json load_spec(const Options& opt) {
  json spec = opt.spec_path.empty() ? json::object() : read_json(opt.spec_path);
  if (!spec.is_object()) throw UsageError("spec must be a JSON object");
  if (opt.seed) spec["rng_seed"] = *opt.seed;
  return spec;
}

tglo::GammaCoeffsd parse_coeffs(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      v.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw UsageError("malformed coefficient '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw UsageError("malformed coefficient '" + item + "'");
  }
  if (v.size() != 6) throw UsageError("--coeffs needs 6 values: c1,ch,chh,chy,cy,cyy");
  tglo::GammaCoeffsd c{v[0], v[1], v[2], v[3], v[4], v[5]};
  if (!c.all_finite()) throw UsageError("coefficients must be finite");
  return c;
}

// Inline flags win over values from --spec.
template <typename Request>
Request coefficient_request(const Options& opt) {
  const json spec = load_spec(opt);
  Request r;
  try {
    if (!opt.lambda.empty()) {
      r.lambda = tglo::parse_lambda(opt.lambda);
    } else if (spec.contains("lambda")) {
      r.lambda = spec["lambda"].get<tglo::LossParamsd>();
    }
    if (!opt.coeffs.empty()) {
      r.coeffs = parse_coeffs(opt.coeffs);
    } else if (spec.contains("coeffs")) {
      r.coeffs = spec["coeffs"].get<tglo::GammaCoeffsd>();
    }
    r.n = opt.n.value_or(spec.value("n", r.n));
    if constexpr (requires { r.alpha; }) r.alpha = opt.alpha.value_or(spec.value("alpha", r.alpha));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return r;
}

// JSON-only commands write to --out when given, stdout otherwise.
void emit_document(const Options& opt, const tglo::CommandOutput& out) {
  const std::string text = out.document.dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    write_text(opt.out_path, text);
  }
}

// CSV goes to --out (stdout without it); the JSON summary goes to stdout, or
// stderr when stdout already carries the CSV.
void emit_csv(const Options& opt, const tglo::CommandOutput& out) {
  const std::string summary = out.document.dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << out.csv;
    std::cerr << summary;
  } else {
    write_text(opt.out_path, out.csv);
    std::cout << summary;
  }
}

void emit_model(const json& spec, const tglo::CommandOutput& out) {
  if (out.model && spec.contains("model_out")) write_text(spec["model_out"].get<std::string>(), out.model->dump() + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loss-function dynamics laboratory"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", opt.spec_path, "JSON experiment spec")->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_path, "output path");
    cmd->add_option("--seed", opt.seed, "override rng_seed from --spec");
  };
  auto add_coeff_flags = [&](CLI::App* cmd) {
    cmd->add_option("--lambda", opt.lambda, "eight comma-separated Taylor parameters");
    cmd->add_option("--coeffs", opt.coeffs, "six comma-separated expanded coefficients c1,ch,chh,chy,cy,cyy");
    cmd->add_option("--n", opt.n, "class count")->check(CLI::Range(2, 1 << 20));
  };

  CLI::App* analyze = app.add_subcommand("analyze", "coefficients, invariant and zero-error dynamics of a loss");
  add_common(analyze);
  add_coeff_flags(analyze);
  CLI::App* smooth = app.add_subcommand("smooth", "fold label smoothing into the coefficients");
  add_common(smooth);
  add_coeff_flags(smooth);
  smooth->add_option("--alpha", opt.alpha, "smoothing factor in (0, 1)");
  CLI::App* trace = app.add_subcommand("trace", "train with per-sample logging and emit the attraction trace");
  add_common(trace);
  CLI::App* search = app.add_subcommand("search", "evolve Taylor loss parameters");
  add_common(search);
  search->add_option("--resume", opt.resume_path, "previous search output to continue from")->check(CLI::ExistingFile);
  CLI::App* attack = app.add_subcommand("attack", "FGSM robustness sweep");
  add_common(attack);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    tglo::CommandOutput out;
    if (analyze->parsed()) {
      out = tglo::run_analyze(coefficient_request<tglo::AnalyzeRequest>(opt));
      emit_document(opt, out);
    } else if (smooth->parsed()) {
      out = tglo::run_smooth(coefficient_request<tglo::SmoothRequest>(opt));
      emit_document(opt, out);
    } else if (trace->parsed()) {
      const json spec = load_spec(opt);
      out = tglo::run_trace(spec);
      emit_csv(opt, out);
      emit_model(spec, out);
    } else if (search->parsed()) {
      std::optional<json> resume;
      if (!opt.resume_path.empty()) resume = read_json(opt.resume_path);
      out = tglo::run_search(load_spec(opt), resume ? &*resume : nullptr);
      emit_document(opt, out);
    } else if (attack->parsed()) {
      out = tglo::run_attack(load_spec(opt));
      emit_csv(opt, out);
    }
    if (!out.checks_passed) {
      std::cerr << "error: self-checks failed\n";
      return kExitFailure;
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
