#include "tnrl/decomposer.hpp"
#include "tnrl/contraction.hpp"
#include "tnrl/environments.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace tnrl;

namespace {

// Joint tensor of two agents that move and are rewarded independently.
DenseTensor separable_joint(const DenseTensor& a, const DenseTensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    DenseTensor out(Shape{sa[0], sb[0], sa[1], sb[1], sa[2], sb[2], sa[3], sb[3]});
    for (std::size_t off = 0; off < out.size(); ++off) {
        const auto i = out.unravel(off);
        out.data()[off] = a({i[0], i[2], i[4], i[6]}) * b({i[1], i[3], i[5], i[7]});
    }
    return out;
}

DenseTensor random_tensor(std::mt19937_64& rng, const Shape& shape) {
    std::normal_distribution<double> g;
    DenseTensor t(shape);
    for (double& x : t.data()) x = g(rng);
    return t;
}

} // namespace

TEST(DecomposeJoint, SeparableModelNeedsOneTerm) {
    const auto a = build_sarl_walker({3, 1.0, 1, 0});
    const auto b = build_sarl_walker({3, 0.5, 1, 0});
    const auto mj = separable_joint(a.model.at(1), b.model.at(1));
    const auto d = decompose_joint(mj, 1);
    EXPECT_EQ(d.chi, 1u);
    EXPECT_EQ(d.m1.shape(), (Shape{7, 4, 7, 2, 1}));
    EXPECT_EQ(d.m2.shape(), (Shape{1, 7, 4, 7, 2}));
    EXPECT_LE(reconstruction_error(mj, d), 1e-10);
}

TEST(DecomposeJoint, FullBondReconstructsAnyTensor) {
    std::mt19937_64 rng(1);
    const auto mj = random_tensor(rng, Shape{2, 2, 2, 2, 2, 2, 2, 2});
    for (auto split : {SingularSplit::symmetric, SingularSplit::into_right}) {
        const auto d = decompose_joint(mj, 16, split);
        EXPECT_EQ(d.chi, 16u);
        EXPECT_LE(reconstruction_error(mj, d), 1e-8);
        EXPECT_LE(max_abs_difference(reconstruct_joint(d), mj), 1e-10);
    }
}

TEST(DecomposeJoint, SplitsAgreeAtEveryBond) {
    std::mt19937_64 rng(2);
    const auto mj = random_tensor(rng, Shape{2, 3, 2, 2, 2, 3, 2, 2});
    for (std::size_t chi = 1; chi <= 8; ++chi) {
        const double sym = reconstruction_error(mj, decompose_joint(mj, chi, SingularSplit::symmetric));
        const double right = reconstruction_error(mj, decompose_joint(mj, chi, SingularSplit::into_right));
        EXPECT_NEAR(sym, right, 1e-9 * (1.0 + sym));
    }
}

TEST(DecomposeJoint, RejectsWrongRank) {
    EXPECT_THROW((void)decompose_joint(DenseTensor(Shape{2, 2, 2, 2}), 1), DimensionMismatchError);
}

TEST(DecomposeBipartite, FactorsKeepGroupAxes) {
    std::mt19937_64 rng(3);
    const auto t = random_tensor(rng, Shape{2, 3, 4});
    const std::size_t left[] = {1};
    const std::size_t right[] = {0, 2};
    const auto f = decompose_bipartite(t, left, right, 3);
    EXPECT_EQ(f.left.shape(), (Shape{3, 3}));
    EXPECT_EQ(f.right.shape(), (Shape{3, 2, 4}));
    // left(j, k) right(k, i, l) summed over k gives t(i, j, l).
    const auto back = contract(f.left, f.right, {{1, 0}}).permute({1, 0, 2});
    EXPECT_LE(max_abs_difference(back, t), 1e-10);
    const std::size_t bad[] = {0};
    EXPECT_THROW((void)decompose_bipartite(t, left, bad, 1), DimensionMismatchError);
}

TEST(SvdScan, ErrorFallsWithBondAndVanishesAtFullRank) {
    std::mt19937_64 rng(4);
    const auto mj = random_tensor(rng, Shape{2, 2, 2, 2, 2, 2, 2, 2});
    std::vector<std::size_t> chis(16);
    for (std::size_t k = 0; k < 16; ++k) chis[k] = k + 1;
    const auto scan = svd_scan(mj, chis);
    ASSERT_EQ(scan.size(), 16u);
    for (std::size_t k = 1; k < scan.size(); ++k) EXPECT_LE(scan[k].alpha, scan[k - 1].alpha + 1e-12);
    EXPECT_LE(scan.back().alpha, 1e-8);
    EXPECT_EQ(scan[4].element_count, 5u * (16u + 16u));
}

TEST(SvdScan, MatchesDirectTruncation) {
    std::mt19937_64 rng(5);
    const auto mj = random_tensor(rng, Shape{3, 2, 2, 2, 3, 2, 2, 2});
    const std::vector<std::size_t> chis = {7, 2, 40, 5};
    const auto scan = svd_scan(mj, chis);
    for (std::size_t k = 0; k < chis.size(); ++k) {
        EXPECT_EQ(scan[k].chi, chis[k]);
        EXPECT_NEAR(scan[k].alpha, reconstruction_error(mj, decompose_joint(mj, chis[k])), 1e-8);
    }
    EXPECT_THROW((void)svd_scan(mj, std::vector<std::size_t>{}), std::invalid_argument);
    EXPECT_THROW((void)svd_scan(mj, std::vector<std::size_t>{0}), std::invalid_argument);
}

TEST(SvdScan, DeterministicWalkerHasRankTwentyFive) {
    const auto w = build_marl_walker({6, 0.0, 2, 0});
    const std::vector<std::size_t> chis = {24, 25};
    const auto scan = svd_scan(w.model.at(1), chis);
    EXPECT_GT(scan[0].alpha, 1e-8);
    EXPECT_LE(scan[1].alpha, 1e-8);
    EXPECT_EQ(scan[1].element_count, 101400u);
}

TEST(ScanCsv, Format) {
    std::ostringstream os;
    write_scan_csv(os, {{1, 0.5, 10}, {2, 0.0, 20}});
    EXPECT_EQ(os.str(), "chi,alpha,elements\n1,0.5,10\n2,0,20\n");
}

TEST(DecomposePolicyAndInitial, FactorsReconstruct) {
    std::mt19937_64 rng(6);
    const auto inst = oracle::random_instance(rng, 3, 2, 2, 1, 2, PolicyKind::per_agent);
    const auto joint = joint_policy_site(inst.policy, 1);
    // Each per-agent policy sees both states, so the split is not a product.
    const auto f = decompose_policy(joint, 9);
    EXPECT_LE(max_abs_difference(contract(f.left, f.right, {{2, 0}}).permute({0, 2, 1, 3}), joint), 1e-10);

    const auto p1 = DenseTensor::vector({0.2, 0.8});
    const auto p2 = DenseTensor::vector({0.5, 0.25, 0.25});
    const auto p0 = contract(p1, p2, {});
    const auto g = decompose_initial(p0, 1);
    EXPECT_EQ(g.chi(), 1u);
    EXPECT_LE(max_abs_difference(contract(g.left, g.right, {{1, 0}}), p0), 1e-12);
}

TEST(ExpectedReturnDecomposed, FullBondsMatchTheJointNetwork) {
    std::mt19937_64 rng(7);
    for (auto kind : {PolicyKind::joint, PolicyKind::per_agent}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto inst = oracle::random_instance(rng, 2, 2, 2, 3, 2, kind);
            const auto net = decompose_network(inst.spec, inst.model, inst.policy, inst.p0, 16, 4, 2);
            const double brute =
                oracle::oracle_expected_return(inst.spec, inst.model, inst.policy, inst.p0).expected_return;
            EXPECT_NEAR(expected_return_decomposed(inst.spec, net), brute, 1e-9);
            EXPECT_NEAR(expected_return_decomposed(inst.spec, net),
                        expected_return(inst.spec, inst.model, inst.policy, inst.p0), 1e-9);
        }
    }
}

TEST(ExpectedReturnDecomposed, DeterministicWalkerAtFullRank) {
    const auto w = build_marl_walker({3, 0.0, 2, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::joint);
    const auto net = decompose_network(w.spec, w.model, pi, w.p0, 49, 4, 1);
    EXPECT_NEAR(expected_return_decomposed(w.spec, net), expected_return(w.spec, w.model, pi, w.p0), 1e-8);
}

TEST(ExpectedReturnDecomposed, TruncationErrorShrinksWithBond) {
    const auto w = build_marl_walker({2, 1.0, 2, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::joint);
    const double exact = expected_return(w.spec, w.model, pi, w.p0);
    const double coarse = std::abs(expected_return_decomposed(w.spec, decompose_network(w.spec, w.model, pi, w.p0, 1, 4, 1)) - exact);
    const double fine = std::abs(expected_return_decomposed(w.spec, decompose_network(w.spec, w.model, pi, w.p0, 25, 4, 1)) - exact);
    EXPECT_LE(fine, 1e-8);
    EXPECT_LE(fine, coarse);
}

TEST(ExpectedReturnDecomposed, RejectsSingleAgentModels) {
    const auto w = build_sarl_walker({2, 0.0, 1, 0});
    const auto pi = uniform_policy(w.spec, PolicyKind::single);
    EXPECT_THROW((void)decompose_network(w.spec, w.model, pi, w.p0, 1, 1, 1), std::invalid_argument);
}
