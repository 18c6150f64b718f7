#include "tnrl/io.hpp"

#include <numeric>
#include <stdexcept>

namespace tnrl {

namespace {

const char* kind_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::single:
        return "single";
    case PolicyKind::joint:
        return "joint";
    case PolicyKind::per_agent:
        return "per_agent";
    }
    throw std::logic_error("unknown policy kind");
}

PolicyKind kind_from_name(const std::string& name) {
    if (name == "single") return PolicyKind::single;
    if (name == "joint") return PolicyKind::joint;
    if (name == "per_agent") return PolicyKind::per_agent;
    throw std::invalid_argument("unknown policy kind '" + name + "'");
}

} // namespace

void to_json(Json& j, const DenseTensor& t) {
    j = Json{{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

void from_json(const Json& j, DenseTensor& t) {
    t = DenseTensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

void to_json(Json& j, const FmdpSpec& spec) {
    j = Json{{"n_states", spec.n_states},     {"n_actions", spec.n_actions},
             {"n_rewards", spec.n_rewards},   {"horizon", spec.horizon},
             {"n_agents", spec.n_agents},     {"reward_values", spec.reward_values},
             {"state_offset", spec.state_offset}, {"action_values", spec.action_values}};
}

void from_json(const Json& j, FmdpSpec& spec) {
    j.at("n_states").get_to(spec.n_states);
    j.at("n_actions").get_to(spec.n_actions);
    j.at("n_rewards").get_to(spec.n_rewards);
    j.at("horizon").get_to(spec.horizon);
    spec.n_agents = j.value("n_agents", std::size_t{1});
    j.at("reward_values").get_to(spec.reward_values);
    spec.state_offset = j.value("state_offset", 0);
    spec.action_values = j.value("action_values", std::vector<int>{});
}

void to_json(Json& j, const TransitionModel& model) { j = Json{{"tensors", model.tensors}}; }

void from_json(const Json& j, TransitionModel& model) { j.at("tensors").get_to(model.tensors); }

void to_json(Json& j, const PolicySet& policy) {
    j = Json{{"kind", kind_name(policy.kind)}, {"sites", policy.sites}};
}

void from_json(const Json& j, PolicySet& policy) {
    policy.kind = kind_from_name(j.at("kind").get<std::string>());
    j.at("sites").get_to(policy.sites);
}

void to_json(Json& j, const InitialDistribution& p0) { j = Json{{"p0", p0.p0}}; }

void from_json(const Json& j, InitialDistribution& p0) { j.at("p0").get_to(p0.p0); }

void to_json(Json& j, const WalkerConfig& cfg) {
    j = Json{{"T", cfg.horizon}, {"sigma", cfg.sigma}, {"n_agents", cfg.n_agents}, {"seed", cfg.seed}};
}

void to_json(Json& j, const PlanConfig& cfg) {
    j = Json{{"alpha", cfg.alpha},
             {"epsilon", cfg.epsilon},
             {"n_traj", cfg.n_traj},
             {"epochs", cfg.n_epochs},
             {"seed", cfg.seed}};
}

void to_json(Json& j, const EpochLog& log) {
    j = Json{{"epoch", log.epoch}, {"e_model", log.e_return_model}, {"e_true", log.e_return_true}};
}

void to_json(Json& j, const ScanRecord& rec) {
    j = Json{{"chi", rec.chi}, {"alpha", rec.alpha}, {"elements", rec.element_count}};
}

Json trajectory_summary(const std::vector<TrajectoryRecord>& records) {
    std::vector<double> returns;
    returns.reserve(records.size());
    for (const auto& r : records) returns.push_back(r.total_return);
    const double mean =
        returns.empty() ? 0.0 : std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
    return Json{{"n", records.size()},
                {"returns", returns},
                {"mean_return", mean},
                {"objective_fraction", objective_fraction(records)}};
}

} // namespace tnrl
