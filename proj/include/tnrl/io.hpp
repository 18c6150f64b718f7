#pragma once

#include "tnrl/decomposer.hpp"
#include "tnrl/environments.hpp"
#include "tnrl/fmdp.hpp"
#include "tnrl/planner.hpp"
#include "tnrl/tensor.hpp"

#include <json.hpp>

namespace tnrl {

using Json = nlohmann::json;

// Tensors serialise as {"shape": [...], "data": [...]} in row-major order.
void to_json(Json& j, const DenseTensor& t);
void from_json(const Json& j, DenseTensor& t);

void to_json(Json& j, const FmdpSpec& spec);
void from_json(const Json& j, FmdpSpec& spec);

void to_json(Json& j, const TransitionModel& model);
void from_json(const Json& j, TransitionModel& model);

void to_json(Json& j, const PolicySet& policy);
void from_json(const Json& j, PolicySet& policy);

void to_json(Json& j, const InitialDistribution& p0);
void from_json(const Json& j, InitialDistribution& p0);

void to_json(Json& j, const WalkerConfig& cfg);
void to_json(Json& j, const PlanConfig& cfg);
void to_json(Json& j, const EpochLog& log);
void to_json(Json& j, const ScanRecord& rec);

/// Returns, objective fraction and mean return of a batch of episodes.
[[nodiscard]] Json trajectory_summary(const std::vector<TrajectoryRecord>& records);

} // namespace tnrl
