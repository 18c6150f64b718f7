#include "tnrl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <stdexcept>

namespace tnrl {

namespace {

struct Move {
    std::size_t next = 0;
    double prob = 0.0;
};

// Distribution of the next state index for one walker, clamped to the grid.
std::vector<Move> step_distribution(std::size_t s, std::size_t a, std::size_t horizon,
                                    const NoiseDistribution& noise) {
    const int T = static_cast<int>(horizon);
    const int state = static_cast<int>(s) - T;
    const int action = a == 0 ? -1 : 1;
    std::vector<Move> moves;
    const std::pair<int, double> outcomes[] = {{-1, noise.down}, {0, noise.stay}, {1, noise.up}};
    for (const auto& [shift, p] : outcomes) {
        if (p == 0.0) continue;
        const int next = std::clamp(state + action + shift, -T, T);
        const auto idx = static_cast<std::size_t>(next + T);
        auto it = std::find_if(moves.begin(), moves.end(), [&](const Move& m) { return m.next == idx; });
        if (it == moves.end()) {
            moves.push_back({idx, p});
        } else {
            it->prob += p;
        }
    }
    return moves;
}

std::size_t reward_index(const FmdpSpec& spec, double value) {
    const auto it = std::find(spec.reward_values.begin(), spec.reward_values.end(), value);
    if (it == spec.reward_values.end()) {
        throw std::logic_error(fmt::format("reward {} has no index", value));
    }
    return static_cast<std::size_t>(it - spec.reward_values.begin());
}

NoiseDistribution walker_noise(const WalkerConfig& cfg) {
    return cfg.sigma == 0.0 ? NoiseDistribution{} : discretize_normal(cfg.sigma);
}

FmdpSpec walker_spec(const WalkerConfig& cfg, std::vector<double> rewards) {
    FmdpSpec spec;
    spec.n_states = 2 * cfg.horizon + 1;
    spec.n_actions = 2;
    spec.n_rewards = rewards.size();
    spec.horizon = cfg.horizon;
    spec.n_agents = cfg.n_agents;
    spec.reward_values = std::move(rewards);
    spec.state_offset = -static_cast<int>(cfg.horizon);
    spec.action_values = {-1, 1};
    return spec;
}

double sarl_reward(bool terminal, int s) {
    if (terminal) return s == 0 ? 1.0 : -10.0;
    return s >= 0 ? 0.0 : -1.0;
}

double marl_reward(bool terminal, int own, int s1, int s2) {
    if (terminal) return own == 0 ? 1.0 : -10.0;
    double r = s1 <= s2 ? -2.0 : 0.0;
    if (own < 0) r -= 1.0;
    return r;
}

// Index of the first entry whose running sum exceeds u, skipping zero entries.
std::size_t draw(std::mt19937_64& rng, std::span<const double> probs, std::size_t stride,
                 std::size_t offset, std::size_t n) {
    const double u = uniform01(rng);
    double cum = 0.0;
    std::size_t last_positive = n;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = probs[k * stride + offset];
        if (p <= 0.0) continue;
        last_positive = k;
        cum += p;
        if (u < cum) return k;
    }
    if (last_positive == n) throw std::logic_error("cannot sample from an all-zero distribution");
    return last_positive;
}

} // namespace

void WalkerConfig::check() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument(fmt::format("sigma must be finite and >= 0, got {}", sigma));
    }
    if (n_agents != 1 && n_agents != 2) {
        throw std::invalid_argument(fmt::format("n_agents must be 1 or 2, got {}", n_agents));
    }
}

NoiseDistribution discretize_normal(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument(fmt::format("sigma must be positive, got {}", sigma));
    }
    const double stay = std::erf(1.0 / (sigma * std::sqrt(2.0)));
    const double tail = (1.0 - stay) / 2.0;
    return {tail, stay, tail};
}

FmdpInstance build_sarl_walker(const WalkerConfig& cfg) {
    cfg.check();
    if (cfg.n_agents != 1) throw std::invalid_argument("build_sarl_walker needs n_agents = 1");
    FmdpInstance inst;
    inst.spec = walker_spec(cfg, {-10.0, -1.0, 0.0, 1.0});
    const FmdpSpec& spec = inst.spec;
    const NoiseDistribution noise = walker_noise(cfg);
    const std::size_t S = spec.n_states;

    auto build = [&](bool terminal) {
        DenseTensor m(transition_shape(spec), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                for (const Move& mv : step_distribution(s, a, cfg.horizon, noise)) {
                    const std::size_t r = reward_index(spec, sarl_reward(terminal, spec.state_value(mv.next)));
                    m({mv.next, r, s, a}) += mv.prob;
                }
            }
        }
        return m;
    };
    const DenseTensor body = build(false);
    for (std::size_t t = 1; t < cfg.horizon; ++t) inst.model.tensors.push_back(body);
    inst.model.tensors.push_back(build(true));
    inst.p0 = point_initial(spec, cfg.horizon);
    return inst;
}

FmdpInstance build_marl_walker(const WalkerConfig& cfg) {
    cfg.check();
    if (cfg.n_agents != 2) throw std::invalid_argument("build_marl_walker needs n_agents = 2");
    FmdpInstance inst;
    inst.spec = walker_spec(cfg, {-10.0, -3.0, -2.0, -1.0, 0.0, 1.0});
    const FmdpSpec& spec = inst.spec;
    const NoiseDistribution noise = walker_noise(cfg);
    const std::size_t S = spec.n_states;

    std::vector<std::vector<Move>> moves(S * 2);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < 2; ++a) moves[s * 2 + a] = step_distribution(s, a, cfg.horizon, noise);
    }

    auto build = [&](bool terminal) {
        DenseTensor m(transition_shape(spec), 0.0);
        for (std::size_t s1 = 0; s1 < S; ++s1) {
            for (std::size_t s2 = 0; s2 < S; ++s2) {
                for (std::size_t a1 = 0; a1 < 2; ++a1) {
                    for (std::size_t a2 = 0; a2 < 2; ++a2) {
                        for (const Move& m1 : moves[s1 * 2 + a1]) {
                            for (const Move& m2 : moves[s2 * 2 + a2]) {
                                const int v1 = spec.state_value(m1.next);
                                const int v2 = spec.state_value(m2.next);
                                const std::size_t r1 = reward_index(spec, marl_reward(terminal, v1, v1, v2));
                                const std::size_t r2 = reward_index(spec, marl_reward(terminal, v2, v1, v2));
                                m({m1.next, m2.next, r1, r2, s1, s2, a1, a2}) += m1.prob * m2.prob;
                            }
                        }
                    }
                }
            }
        }
        return m;
    };
    const DenseTensor body = build(false);
    for (std::size_t t = 1; t < cfg.horizon; ++t) inst.model.tensors.push_back(body);
    inst.model.tensors.push_back(build(true));
    inst.p0 = point_initial(spec, cfg.horizon);
    return inst;
}

bool sarl_walker_objective(const TrajectoryRecord& rec) {
    const auto& s = rec.states.at(0);
    const std::size_t T = s.size() - 1;
    for (std::size_t t = 1; t < T; ++t) {
        if (s[t] < 0) return false;
    }
    return s[T] == 0;
}

bool marl_walker_objective(const TrajectoryRecord& rec) {
    const auto& s1 = rec.states.at(0);
    const auto& s2 = rec.states.at(1);
    const std::size_t T = s1.size() - 1;
    for (std::size_t t = 1; t < T; ++t) {
        if (!(s1[t] > s2[t] && s2[t] >= 0)) return false;
    }
    return s1[T] == 0 && s2[T] == 0;
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(seed ^ index);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<TrajectoryRecord> sample_trajectories(const FmdpSpec& spec, const TransitionModel& model,
                                                  const PolicySet& policy, const InitialDistribution& p0,
                                                  std::size_t n_traj, double epsilon, std::uint64_t seed,
                                                  const ObjectivePredicate& objective) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument(fmt::format("epsilon must lie in [0, 1], got {}", epsilon));
    }
    spec.check();
    check_dimensions(spec, model);
    check_dimensions(spec, policy);
    check_dimensions(spec, p0);

    const std::size_t n = spec.n_agents;
    const std::size_t T = spec.horizon;
    const std::size_t NS = spec.n_states;
    const std::size_t NA = spec.n_actions;
    const std::size_t NR = spec.n_rewards;
    const std::size_t S = spec.joint_states();
    const std::size_t A = spec.joint_actions();
    const std::size_t R = spec.joint_rewards();

    std::vector<DenseTensor> sites;
    sites.reserve(T);
    for (std::size_t t = 1; t <= T; ++t) sites.push_back(joint_policy_site(policy, t));

    // Split a grouped index into per-agent indices (agent 1 most significant).
    auto split = [n](std::size_t idx, std::size_t base) {
        std::vector<std::size_t> out(n);
        for (std::size_t k = n; k-- > 0;) {
            out[k] = idx % base;
            idx /= base;
        }
        return out;
    };

    std::vector<TrajectoryRecord> records;
    records.reserve(n_traj);
    for (std::size_t traj = 0; traj < n_traj; ++traj) {
        auto rng = trajectory_rng(seed, traj);
        TrajectoryRecord rec;
        rec.states.assign(n, {});
        rec.actions.assign(n, {});
        rec.rewards.assign(n, {});
        rec.state_index.assign(n, {});
        rec.action_index.assign(n, {});
        rec.reward_index.assign(n, {});

        std::size_t state = draw(rng, p0.p0.data(), 1, 0, S);
        auto record_state = [&](std::size_t joint) {
            const auto per = split(joint, NS);
            for (std::size_t k = 0; k < n; ++k) {
                rec.state_index[k].push_back(per[k]);
                rec.states[k].push_back(spec.state_value(per[k]));
            }
        };
        record_state(state);

        for (std::size_t t = 1; t <= T; ++t) {
            auto actions = split(draw(rng, sites[t - 1].data(), S, state, A), NA);
            for (std::size_t k = 0; k < n; ++k) {
                if (uniform01(rng) < epsilon) actions[k] = NA - 1 - actions[k];
            }
            std::size_t action = 0;
            for (std::size_t k = 0; k < n; ++k) action = action * NA + actions[k];

            const std::size_t outcome = draw(rng, model.at(t).data(), S * A, state * A + action, S * R);
            const std::size_t next = outcome / R;
            const auto rewards = split(outcome % R, NR);
            for (std::size_t k = 0; k < n; ++k) {
                rec.action_index[k].push_back(actions[k]);
                rec.actions[k].push_back(spec.action_value(actions[k]));
                rec.reward_index[k].push_back(rewards[k]);
                rec.rewards[k].push_back(spec.reward_values[rewards[k]]);
                rec.total_return += spec.reward_values[rewards[k]];
            }
            record_state(next);
            state = next;
        }
        if (objective) rec.satisfied_objective = objective(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

double objective_fraction(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) return 0.0;
    const auto hits = std::count_if(records.begin(), records.end(),
                                    [](const TrajectoryRecord& r) { return r.satisfied_objective; });
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mean_state(const std::vector<TrajectoryRecord>& records, std::size_t t_first, std::size_t t_last) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& rec : records) {
        for (const auto& states : rec.states) {
            for (std::size_t t = t_first; t <= t_last && t < states.size(); ++t) {
                total += states[t];
                ++count;
            }
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
    out << "traj_id,agent,t,s,a,r\n";
    for (std::size_t id = 0; id < records.size(); ++id) {
        const auto& rec = records[id];
        for (std::size_t k = 0; k < rec.states.size(); ++k) {
            const std::size_t T = rec.actions[k].size();
            for (std::size_t t = 0; t <= T; ++t) {
                out << fmt::format("{},{},{},{},", id, k + 1, t, rec.states[k][t]);
                if (t < T) out << rec.actions[k][t];
                out << ',';
                if (t > 0) out << fmt::format("{}", rec.rewards[k][t - 1]);
                out << '\n';
            }
        }
    }
}

} // namespace tnrl
