#include "tnrl/return_mpo.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace tnrl;

namespace {

// Point mass on the given reward indices, one axis per reward.
DenseTensor point_rewards(std::size_t n_rewards, const std::vector<std::size_t>& idx) {
    DenseTensor t(Shape(idx.size(), n_rewards), 0.0);
    t.at(idx) = 1.0;
    return t;
}

// Brute force: Σ over reward combinations of P · Σ rewards.
double brute_force(const DenseTensor& dist, const std::vector<double>& values) {
    double total = 0.0;
    for (std::size_t off = 0; off < dist.size(); ++off) {
        double g = 0.0;
        for (std::size_t r : dist.unravel(off)) g += values[r];
        total += dist.data()[off] * g;
    }
    return total;
}

DenseTensor random_distribution(std::mt19937_64& rng, const Shape& shape) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DenseTensor t(shape);
    double total = 0.0;
    for (double& x : t.data()) total += (x = u(rng));
    t *= 1.0 / total;
    return t;
}

} // namespace

TEST(SarlMpo, SiteForms) {
    const std::vector<double> r = {-1.0, 2.0};
    const auto mpo = build_sarl_mpo(3, r);
    ASSERT_EQ(mpo.size(), 3u);
    EXPECT_EQ(mpo.sites[0].tensor, DenseTensor::matrix(2, 2, {-1, 2, 1, 1}));
    const auto& mid = mpo.sites[1].tensor;
    ASSERT_EQ(mid.shape(), (Shape{2, 2, 2}));
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_DOUBLE_EQ(mid({0, 0, k}), 1.0);
        EXPECT_DOUBLE_EQ(mid({0, 1, k}), 0.0);
        EXPECT_DOUBLE_EQ(mid({1, 0, k}), r[k]);
        EXPECT_DOUBLE_EQ(mid({1, 1, k}), 1.0);
    }
    EXPECT_EQ(mpo.sites[2].tensor, DenseTensor::matrix(2, 2, {1, 1, -1, 2}));
}

TEST(SarlMpo, PointMassesGiveSummedReward) {
    const std::vector<double> values = {-10.0, -1.0, 0.0, 1.0};
    const auto mpo = build_sarl_mpo(4, values);
    std::vector<std::size_t> idx(4, 0);
    for (std::size_t combo = 0; combo < 256; ++combo) {
        std::size_t rem = combo;
        double expected = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
            idx[t] = rem % 4;
            rem /= 4;
            expected += values[idx[t]];
        }
        EXPECT_DOUBLE_EQ(mpo_expectation(mpo, point_rewards(4, idx)), expected);
    }
}

TEST(SarlMpo, SingleStepIsTheRewardVector) {
    const std::vector<double> values = {5.0};
    const auto mpo = build_sarl_mpo(1, values);
    EXPECT_EQ(mpo.sites[0].tensor, DenseTensor::vector({5.0}));
    EXPECT_DOUBLE_EQ(mpo_expectation(mpo, DenseTensor::vector({1.0})), 5.0);
}

TEST(SarlMpo, UniformTwoStepDistribution) {
    const std::vector<double> values = {0.0, 1.0};
    const auto mpo = build_sarl_mpo(2, values);
    EXPECT_DOUBLE_EQ(mpo_expectation(mpo, DenseTensor(Shape{2, 2}, 0.25)), 1.0);
}

TEST(SnakeMpo, SingleAgentMatchesSarl) {
    const std::vector<double> values = {-2.0, 0.5, 3.0};
    const auto a = build_sarl_mpo(4, values);
    const auto b = build_snake_mpo(4, 1, values);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.sites[k].tensor, b.sites[k].tensor);
}

TEST(SnakeMpo, VisitsAgentsInSnakeOrder) {
    const std::vector<double> values = {0.0, -1.0};
    const auto mpo = build_snake_mpo(3, 2, values);
    ASSERT_EQ(mpo.size(), 6u);
    const std::vector<std::pair<std::size_t, std::size_t>> expected = {{1, 1}, {1, 2}, {2, 2},
                                                                       {2, 1}, {3, 1}, {3, 2}};
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(mpo.sites[k].timestep, expected[k].first);
        EXPECT_EQ(mpo.sites[k].agent, expected[k].second);
        EXPECT_LE(mpo.bond_form(k).dim(0), 2u);
        EXPECT_LE(mpo.bond_form(k).dim(1), 2u);
    }
}

TEST(SnakeMpo, TwoAgentPointMass) {
    const std::vector<double> values = {0.0, -1.0};
    const auto mpo = build_snake_mpo(1, 2, values);
    EXPECT_DOUBLE_EQ(mpo_expectation(mpo, point_rewards(2, {1, 1})), -2.0);
}

TEST(SnakeMpo, MatchesBruteForceOnCorrelatedDistributions) {
    std::mt19937_64 rng(1);
    const std::vector<double> values = {-10.0, -3.0, -2.0, -1.0, 0.0, 1.0};
    for (auto [T, n] : {std::pair<std::size_t, std::size_t>{2, 2}, {3, 2}, {4, 1}, {2, 3}}) {
        const auto mpo = build_snake_mpo(T, n, values);
        const auto dist = random_distribution(rng, Shape(T * n, values.size()));
        EXPECT_NEAR(mpo_expectation(mpo, dist), brute_force(dist, values), 1e-9);
    }
}

TEST(FusedMpo, InteriorElementIsSumOfRewardProducts) {
    const std::vector<double> values = {0.0, -1.0};
    const auto fused = fuse_per_timestep(build_snake_mpo(3, 2, values));
    ASSERT_EQ(fused.size(), 3u);
    const auto& mid = fused.sites[1].tensor;
    ASSERT_EQ(mid.shape(), (Shape{2, 2, 4}));
    // (r1, r2) fused as r1 * 2 + r2: R⊗1 + 1⊗R = [0, -1, -1, -2]
    const double expected[] = {0.0, -1.0, -1.0, -2.0};
    for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_DOUBLE_EQ(mid({1, 0, r}), expected[r]);
        EXPECT_DOUBLE_EQ(mid({0, 0, r}), 1.0);
        EXPECT_DOUBLE_EQ(mid({1, 1, r}), 1.0);
        EXPECT_DOUBLE_EQ(mid({0, 1, r}), 0.0);
    }
}

TEST(FusedMpo, AgreesWithUnfusedChain) {
    std::mt19937_64 rng(2);
    const std::vector<double> values = {-1.0, 0.0, 2.0};
    for (std::size_t T : {1u, 2u, 3u}) {
        const auto snake = build_snake_mpo(T, 2, values);
        const auto fused = fuse_per_timestep(snake);
        EXPECT_TRUE(fused.fused);
        const auto dist = random_distribution(rng, Shape(2 * T, 3));
        EXPECT_NEAR(mpo_expectation(fused, dist), mpo_expectation(snake, dist), 1e-10);
    }
}

TEST(FusedMpo, SingleAgentIsUnchanged) {
    const std::vector<double> values = {1.0, 4.0};
    const auto snake = build_snake_mpo(3, 1, values);
    const auto fused = fuse_per_timestep(snake);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(fused.sites[k].tensor, snake.sites[k].tensor);
}

TEST(FlatMpo, MarginalisesEverything) {
    std::mt19937_64 rng(3);
    const auto dist = random_distribution(rng, Shape{3, 3, 3});
    EXPECT_NEAR(mpo_expectation(flat_mpo(3, 3), dist), 1.0, 1e-12);
}
