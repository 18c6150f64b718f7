#include "tnrl/environments.hpp"
#include "tnrl/contraction.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace tnrl;

namespace {

std::size_t reward_index(const FmdpSpec& spec, double value) {
    for (std::size_t k = 0; k < spec.reward_values.size(); ++k) {
        if (spec.reward_values[k] == value) return k;
    }
    ADD_FAILURE() << "reward value " << value << " missing";
    return 0;
}

} // namespace

TEST(DiscretizeNormal, UnitSigmaMatchesNormalTable) {
    const auto n = discretize_normal(1.0);
    EXPECT_NEAR(n.stay, 0.682689, 1e-6);
    EXPECT_NEAR(n.down, 0.158655, 1e-6);
    EXPECT_NEAR(n.up, 0.158655, 1e-6);
}

TEST(DiscretizeNormal, TinySigmaIsAlmostDeterministic) {
    const auto n = discretize_normal(1e-6);
    EXPECT_DOUBLE_EQ(n.stay, 1.0);
    EXPECT_DOUBLE_EQ(n.down, 0.0);
}

TEST(DiscretizeNormal, SymmetricAndNormalised) {
    for (double sigma : {0.1, 0.5, 1.0, 3.0, 30.0}) {
        const auto n = discretize_normal(sigma);
        EXPECT_EQ(n.down, n.up);
        EXPECT_NEAR(n.down + n.stay + n.up, 1.0, 1e-15);
    }
    EXPECT_THROW((void)discretize_normal(0.0), std::invalid_argument);
    EXPECT_THROW((void)discretize_normal(-1.0), std::invalid_argument);
}

TEST(SarlWalker, DimensionsAndValidity) {
    for (double sigma : {0.0, 1.0}) {
        const auto w = build_sarl_walker({20, sigma, 1, 0});
        EXPECT_EQ(w.spec.n_states, 41u);
        EXPECT_EQ(w.spec.n_actions, 2u);
        EXPECT_EQ(w.spec.n_rewards, 4u);
        EXPECT_EQ(w.spec.horizon, 20u);
        EXPECT_EQ(w.model.tensors.size(), 20u);
        EXPECT_TRUE(validate(w.model).empty());
        EXPECT_TRUE(validate(w.p0).empty());
        EXPECT_DOUBLE_EQ(w.p0.p0({20}), 1.0);
    }
}

TEST(SarlWalker, DeterministicMovesAndRewards) {
    const auto w = build_sarl_walker({5, 0.0, 1, 0});
    const auto& spec = w.spec;
    // State index i is semantic i - 5; action 1 is up.
    const auto& m1 = w.model.at(1);
    EXPECT_DOUBLE_EQ(m1({6, reward_index(spec, 0.0), 5, 1}), 1.0);
    EXPECT_DOUBLE_EQ(m1({4, reward_index(spec, -1.0), 5, 0}), 1.0);
    // Clamped at the top boundary.
    EXPECT_DOUBLE_EQ(m1({10, reward_index(spec, 0.0), 10, 1}), 1.0);
    EXPECT_DOUBLE_EQ(m1({0, reward_index(spec, -1.0), 0, 0}), 1.0);
    const auto& last = w.model.at(5);
    EXPECT_DOUBLE_EQ(last({5, reward_index(spec, 1.0), 4, 1}), 1.0);
    EXPECT_DOUBLE_EQ(last({7, reward_index(spec, -10.0), 6, 1}), 1.0);
    EXPECT_DOUBLE_EQ(last({3, reward_index(spec, -10.0), 4, 0}), 1.0);
}

TEST(SarlWalker, NoisyBoundaryCollectsOvershoot) {
    const auto w = build_sarl_walker({3, 1.0, 1, 0});
    const auto n = discretize_normal(1.0);
    const auto& m = w.model.at(1);
    double top = 0.0;
    for (std::size_t r = 0; r < w.spec.n_rewards; ++r) top += m({6, r, 5, 1});
    EXPECT_NEAR(top, n.stay + n.up, 1e-15);
    double below = 0.0;
    for (std::size_t r = 0; r < w.spec.n_rewards; ++r) below += m({5, r, 5, 1});
    EXPECT_NEAR(below, n.down, 1e-15);
}

TEST(SarlWalker, RejectsBadConfig) {
    EXPECT_THROW((void)build_sarl_walker({0, 0.0, 1, 0}), std::invalid_argument);
    EXPECT_THROW((void)build_sarl_walker({5, -1.0, 1, 0}), std::invalid_argument);
    EXPECT_THROW((void)build_sarl_walker({5, 0.0, 2, 0}), std::invalid_argument);
}

TEST(MarlWalker, DimensionsAndValidity) {
    const auto w = build_marl_walker({6, 0.5, 2, 0});
    EXPECT_EQ(w.spec.n_states, 13u);
    EXPECT_EQ(w.spec.n_rewards, 6u);
    EXPECT_EQ(w.spec.n_agents, 2u);
    EXPECT_EQ(w.model.at(1).shape(), (Shape{13, 13, 6, 6, 13, 13, 2, 2}));
    // Grouped view sizes: S'R by SA = (169 * 36) by (169 * 4).
    EXPECT_EQ(w.spec.joint_states() * w.spec.joint_actions(), 169u * 4u);
    EXPECT_EQ(13u * 6u * 13u * 2u, 2028u);
    EXPECT_TRUE(validate(w.model).empty());
    EXPECT_DOUBLE_EQ(w.p0.p0({6, 6}), 1.0);
}

TEST(MarlWalker, CoupledRewards) {
    const auto w = build_marl_walker({3, 0.0, 2, 0});
    const auto& spec = w.spec;
    const auto& m = w.model.at(1);
    // From (0, 0) both up -> (1, 1): tie counts as s1 <= s2, so both lose 2.
    EXPECT_DOUBLE_EQ(m({4, 4, reward_index(spec, -2.0), reward_index(spec, -2.0), 3, 3, 1, 1}), 1.0);
    // Agent 1 up, agent 2 down -> (1, -1): agent 2 negative only.
    EXPECT_DOUBLE_EQ(m({4, 2, reward_index(spec, 0.0), reward_index(spec, -1.0), 3, 3, 1, 0}), 1.0);
    // Agent 1 down, agent 2 up -> (-1, 1): both penalised, agent 1 also negative.
    EXPECT_DOUBLE_EQ(m({2, 4, reward_index(spec, -3.0), reward_index(spec, -2.0), 3, 3, 0, 1}), 1.0);
    const auto& last = w.model.at(3);
    EXPECT_DOUBLE_EQ(last({3, 4, reward_index(spec, 1.0), reward_index(spec, -10.0), 2, 3, 1, 1}), 1.0);
}

TEST(Sampling, SameSeedSameTrajectories) {
    const auto w = build_sarl_walker({10, 1.0, 1, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::single);
    const auto a = sample_trajectories(w.spec, w.model, pi, w.p0, 20, 0.1, 42);
    const auto b = sample_trajectories(w.spec, w.model, pi, w.p0, 20, 0.1, 42);
    const auto c = sample_trajectories(w.spec, w.model, pi, w.p0, 20, 0.1, 43);
    ASSERT_EQ(a.size(), 20u);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].states, b[i].states);
        EXPECT_EQ(a[i].actions, b[i].actions);
        any_diff = any_diff || a[i].states != c[i].states;
    }
    EXPECT_TRUE(any_diff);
}

TEST(Sampling, DeterministicPolicyAndModelGiveOneTrajectory) {
    const auto w = build_sarl_walker({8, 0.0, 1, 0});
    auto pi = uniform_policy(w.spec, PolicyKind::single);
    for (std::size_t t = 1; t <= 8; ++t) {
        auto& site = pi.at(t);
        for (std::size_t s = 0; s < w.spec.n_states; ++s) {
            site({0, s}) = t % 2 ? 0.0 : 1.0;
            site({1, s}) = t % 2 ? 1.0 : 0.0;
        }
    }
    const auto recs = sample_trajectories(w.spec, w.model, pi, w.p0, 10, 0.0, 5, sarl_walker_objective);
    for (const auto& r : recs) EXPECT_EQ(r.states, recs.front().states);
    EXPECT_EQ(recs.front().states[0], (std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0}));
    EXPECT_DOUBLE_EQ(recs.front().total_return, 1.0);
    EXPECT_DOUBLE_EQ(objective_fraction(recs), 1.0);
}

TEST(Sampling, EpsilonOneFlipsEveryAction) {
    const auto w = build_sarl_walker({4, 0.0, 1, 0});
    auto pi = uniform_policy(w.spec, PolicyKind::single);
    for (std::size_t t = 1; t <= 4; ++t) {
        auto& site = pi.at(t);
        for (std::size_t s = 0; s < w.spec.n_states; ++s) {
            site({0, s}) = 0.0;
            site({1, s}) = 1.0;
        }
    }
    const auto recs = sample_trajectories(w.spec, w.model, pi, w.p0, 3, 1.0, 9);
    for (const auto& r : recs) EXPECT_EQ(r.states[0], (std::vector<int>{0, -1, -2, -3, -4}));
}

TEST(Sampling, StatesStayInsideTheLightCone) {
    const auto w = build_sarl_walker({10, 2.0, 1, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::single);
    for (const auto& r : sample_trajectories(w.spec, w.model, pi, w.p0, 200, 0.3, 1)) {
        for (std::size_t t = 0; t <= 10; ++t) EXPECT_LE(std::abs(r.states[0][t]), static_cast<int>(2 * t));
    }
}

TEST(Sampling, MeanReturnMatchesContractionWithinThreeStandardErrors) {
    const auto w = build_sarl_walker({10, 1.0, 1, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::single);
    const auto recs = sample_trajectories(w.spec, w.model, pi, w.p0, 4000, 0.0, 77);
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& r : recs) {
        sum += r.total_return;
        sq += r.total_return * r.total_return;
    }
    const double n = static_cast<double>(recs.size());
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_NEAR(mean, expected_return(w.spec, w.model, pi, w.p0), 3.0 * se);
}

TEST(Sampling, TwoAgentRecordsCarryBothAgents) {
    const auto w = build_marl_walker({3, 0.0, 2, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::per_agent);
    const auto recs = sample_trajectories(w.spec, w.model, pi, w.p0, 5, 0.0, 3, marl_walker_objective);
    for (const auto& r : recs) {
        ASSERT_EQ(r.states.size(), 2u);
        EXPECT_EQ(r.states[1].size(), 4u);
        EXPECT_EQ(r.actions[1].size(), 3u);
        double total = 0.0;
        for (const auto& per : r.rewards) {
            for (double x : per) total += x;
        }
        EXPECT_DOUBLE_EQ(total, r.total_return);
        // Both agents start on the same state, which violates s1 > s2.
        EXPECT_FALSE(r.satisfied_objective && r.states[0][1] <= r.states[1][1]);
    }
}

TEST(Objectives, SarlAndMarlPredicates) {
    TrajectoryRecord r;
    r.states = {{0, 1, 0, 1, 0}};
    EXPECT_TRUE(sarl_walker_objective(r));
    r.states = {{0, 1, -1, 0, 0}};
    EXPECT_FALSE(sarl_walker_objective(r));
    r.states = {{0, 1, 1, 1, 1}};
    EXPECT_FALSE(sarl_walker_objective(r));
    r.states = {{0, 2, 1, 0}, {0, 0, 0, 0}};
    EXPECT_TRUE(marl_walker_objective(r));
    r.states = {{0, 1, 1, 0}, {0, 1, 0, 0}};
    EXPECT_FALSE(marl_walker_objective(r));
}

TEST(Statistics, MeanStateAndFraction) {
    std::vector<TrajectoryRecord> recs(2);
    recs[0].states = {{0, 1, 2}};
    recs[1].states = {{0, -1, 4}};
    recs[1].satisfied_objective = true;
    EXPECT_DOUBLE_EQ(mean_state(recs, 1, 2), 1.5);
    EXPECT_DOUBLE_EQ(objective_fraction(recs), 0.5);
    EXPECT_DOUBLE_EQ(objective_fraction({}), 0.0);
}

TEST(TrajectoryCsv, HeaderAndBlankCells) {
    const auto w = build_sarl_walker({2, 0.0, 1, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::single);
    const auto recs = sample_trajectories(w.spec, w.model, pi, w.p0, 1, 0.0, 0);
    std::ostringstream os;
    write_trajectories_csv(os, recs);
    std::istringstream in(os.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "traj_id,agent,t,s,a,r");
    EXPECT_EQ(lines[1].rfind("0,1,0,0,", 0), 0u);
    EXPECT_EQ(lines[1].back(), ',');
    EXPECT_NE(lines[3].find(",,"), std::string::npos);
}
