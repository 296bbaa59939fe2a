#pragma once

// JSON and CSV encodings of the laboratory's data types.
//
//   LossParams      [l0, ..., l7]
//   GammaCoeffs     {"c1", "ch", "chh", "chy", "cy", "cyy"}
//   Network         {"layer_sizes": [...], "layers": [{"weights": [...col-major...], "bias": [...]}]}

#include "tglo/adversarial.hpp"
#include "tglo/evolution.hpp"
#include "tglo/invariant.hpp"
#include "tglo/loss_core.hpp"
#include "tglo/network.hpp"
#include "tglo/training.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>

namespace tglo {

inline constexpr int kFormatVersion = 1;

void to_json(nlohmann::json& j, const LossParamsd& p);
void from_json(const nlohmann::json& j, LossParamsd& p);
void to_json(nlohmann::json& j, const GammaCoeffsd& c);
void from_json(const nlohmann::json& j, GammaCoeffsd& c);
void to_json(nlohmann::json& j, const ZeroErrorCoeffsd& z);
void to_json(nlohmann::json& j, const InvariantReport<double>& r);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const EvalBudget& b);
void from_json(const nlohmann::json& j, EvalBudget& b);
void to_json(nlohmann::json& j, const RunLog& log);

void to_json(nlohmann::json& j, const SearchConfig& c);
void from_json(const nlohmann::json& j, SearchConfig& c);
void to_json(nlohmann::json& j, const Candidate& c);
void from_json(const nlohmann::json& j, Candidate& c);
void to_json(nlohmann::json& j, const SearchResult& r);
void from_json(const nlohmann::json& j, SearchResult& r);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

void to_json(nlohmann::json& j, const SweepPoint& p);

/// epsilon,accuracy with %.9g floats.
void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> sweep);

}  // namespace tglo
