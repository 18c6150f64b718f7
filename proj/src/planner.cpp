#include "tnrl/planner.hpp"

#include "tnrl/contraction.hpp"
#include "tnrl/policy_optimizer.hpp"

#include <fmt/format.h>
#include <ostream>
#include <stdexcept>

namespace tnrl {

void PlanConfig::check() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument(fmt::format("alpha must lie in [0, 1], got {}", alpha));
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument(fmt::format("epsilon must lie in [0, 1], got {}", epsilon));
    }
}

TransitionModel init_uniform_model(const FmdpSpec& spec) {
    spec.check();
    const double p = 1.0 / static_cast<double>(spec.joint_states() * spec.joint_rewards());
    TransitionModel model;
    model.tensors.assign(spec.horizon, DenseTensor(transition_shape(spec), p));
    return model;
}

TransitionModel update_model(const FmdpSpec& spec, const TransitionModel& model,
                             const std::vector<TrajectoryRecord>& trajectories, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument(fmt::format("alpha must lie in [0, 1], got {}", alpha));
    }
    check_dimensions(spec, model);
    const std::size_t T = spec.horizon;
    const std::size_t S = spec.joint_states();
    const std::size_t A = spec.joint_actions();
    const std::size_t R = spec.joint_rewards();
    const std::size_t SA = S * A;
    const std::size_t n = spec.n_agents;

    auto group = [n](const std::vector<std::vector<std::size_t>>& per_agent, std::size_t t, std::size_t base) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < n; ++k) idx = idx * base + per_agent.at(k).at(t);
        return idx;
    };

    // counts[pool] is laid out like a grouped transition tensor (S'R, SA).
    std::vector<std::vector<double>> counts(2, std::vector<double>(S * R * SA, 0.0));
    for (const auto& rec : trajectories) {
        if (rec.actions.size() != n || rec.actions.at(0).size() != T) {
            throw DimensionMismatchError("trajectory does not match the model's horizon or agent count");
        }
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t s = group(rec.state_index, t, spec.n_states);
            const std::size_t a = group(rec.action_index, t, spec.n_actions);
            const std::size_t sp = group(rec.state_index, t + 1, spec.n_states);
            const std::size_t r = group(rec.reward_index, t, spec.n_rewards);
            const std::size_t pool = t + 1 == T ? 1 : 0;
            counts[pool][(sp * R + r) * SA + s * A + a] += 1.0;
        }
    }

    TransitionModel out = model;
    for (std::size_t pool = 0; pool < 2; ++pool) {
        const auto& c = counts[pool];
        for (std::size_t col = 0; col < SA; ++col) {
            double total = 0.0;
            for (std::size_t o = 0; o < S * R; ++o) total += c[o * SA + col];
            if (total == 0.0) continue;
            const std::size_t t_begin = pool == 0 ? 1 : T;
            const std::size_t t_end = pool == 0 ? T - 1 : T;
            for (std::size_t t = t_begin; t <= t_end; ++t) {
                auto m = out.tensors[t - 1].data();
                for (std::size_t o = 0; o < S * R; ++o) {
                    double& entry = m[o * SA + col];
                    entry += alpha * (c[o * SA + col] / total - entry);
                }
            }
        }
    }
    return out;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
    return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch);
}

PlanResult plan(const FmdpSpec& spec, const TransitionModel& true_model, const InitialDistribution& p0,
                const PlanConfig& cfg) {
    cfg.check();
    if (spec.n_agents != 1) throw std::invalid_argument("planning supports single-agent models only");
    check_dimensions(spec, true_model);
    require_valid(true_model);
    require_valid(p0);

    PlanResult result;
    result.model = init_uniform_model(spec);
    result.policy = uniform_policy(spec, PolicyKind::single);
    result.log.push_back({0, expected_return(spec, result.model, result.policy, p0),
                          expected_return(spec, true_model, result.policy, p0)});

    for (std::size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        const auto trajectories = sample_trajectories(spec, true_model, result.policy, p0, cfg.n_traj,
                                                      cfg.epsilon, epoch_seed(cfg.seed, epoch));
        result.model = update_model(spec, result.model, trajectories, cfg.alpha);
        result.policy = optimize_sarl(spec, result.model, result.policy, p0).first;
        result.log.push_back({epoch, expected_return(spec, result.model, result.policy, p0),
                              expected_return(spec, true_model, result.policy, p0)});
    }
    return result;
}

void write_plan_csv(std::ostream& out, const std::vector<EpochLog>& log) {
    out << "epoch,e_model,e_true\n";
    for (const auto& e : log) out << fmt::format("{},{:.17g},{:.17g}\n", e.epoch, e.e_return_model, e.e_return_true);
}

} // namespace tnrl
