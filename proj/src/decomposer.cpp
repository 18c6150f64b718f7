#include "tnrl/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tnrl {

namespace {

constexpr std::size_t kAgentOneAxes[] = {0, 2, 4, 6};
constexpr std::size_t kAgentTwoAxes[] = {1, 3, 5, 7};

DenseTensor flatten_agents(const DenseTensor& mj) {
    if (mj.rank() != 8) {
        throw DimensionMismatchError(fmt::format("joint transition must have rank 8, got {}", mj.rank()));
    }
    std::vector<std::size_t> order(kAgentOneAxes, kAgentOneAxes + 4);
    order.insert(order.end(), kAgentTwoAxes, kAgentTwoAxes + 4);
    const auto& s = mj.shape();
    return reshape(mj, Shape{s[0] * s[2] * s[4] * s[6], s[1] * s[3] * s[5] * s[7]}, order);
}

} // namespace

BipartiteFactors decompose_bipartite(const DenseTensor& t, std::span<const std::size_t> left_axes,
                                     std::span<const std::size_t> right_axes, std::size_t chi,
                                     SingularSplit split) {
    std::vector<std::size_t> order(left_axes.begin(), left_axes.end());
    order.insert(order.end(), right_axes.begin(), right_axes.end());
    if (order.size() != t.rank()) {
        throw DimensionMismatchError(
            fmt::format("{} + {} axes given for a rank-{} tensor", left_axes.size(), right_axes.size(), t.rank()));
    }
    Shape left_shape;
    Shape right_shape;
    for (std::size_t ax : left_axes) left_shape.push_back(t.dim(ax));
    for (std::size_t ax : right_axes) right_shape.push_back(t.dim(ax));
    const std::size_t rows = product(left_shape);
    const std::size_t cols = product(right_shape);

    SvdFactors f = svd_truncated(reshape(t, Shape{rows, cols}, order), chi);
    const std::size_t k_max = f.chi();
    for (std::size_t k = 0; k < k_max; ++k) {
        const double lam = f.lambda[k];
        const double left_scale = split == SingularSplit::symmetric ? std::sqrt(lam) : 1.0;
        const double right_scale = split == SingularSplit::symmetric ? std::sqrt(lam) : lam;
        for (std::size_t i = 0; i < rows; ++i) f.u.data()[i * k_max + k] *= left_scale;
        for (std::size_t j = 0; j < cols; ++j) f.v.data()[k * cols + j] *= right_scale;
    }
    left_shape.push_back(k_max);
    right_shape.insert(right_shape.begin(), k_max);
    return {std::move(f.u).reshaped(left_shape), std::move(f.v).reshaped(right_shape), std::move(f.lambda)};
}

DecomposedTransition decompose_joint(const DenseTensor& mj, std::size_t chi, SingularSplit split) {
    if (mj.rank() != 8) {
        throw DimensionMismatchError(fmt::format("joint transition must have rank 8, got {}", mj.rank()));
    }
    BipartiteFactors f = decompose_bipartite(mj, kAgentOneAxes, kAgentTwoAxes, chi, split);
    DecomposedTransition d;
    d.chi = f.chi();
    d.m1 = std::move(f.left);
    d.m2 = std::move(f.right);
    d.singular_values = std::move(f.singular_values);
    return d;
}

DenseTensor reconstruct_joint(const DecomposedTransition& d) {
    // (s1', r1, s1, a1, s2', r2, s2, a2) -> (s1', s2', r1, r2, s1, s2, a1, a2)
    return contract(d.m1, d.m2, {{4, 0}}).permute({0, 4, 1, 5, 2, 6, 3, 7});
}

double reconstruction_error(const DenseTensor& mj, const DecomposedTransition& d) {
    const DenseTensor rec = reconstruct_joint(d);
    if (rec.shape() != mj.shape()) {
        throw ShapeMismatchError("decomposition does not match the joint tensor's shape");
    }
    return sum_abs_difference(rec, mj);
}

std::vector<ScanRecord> svd_scan(const DenseTensor& mj, std::span<const std::size_t> chi_values) {
    if (chi_values.empty()) throw std::invalid_argument("svd_scan needs at least one chi value");
    if (std::find(chi_values.begin(), chi_values.end(), 0) != chi_values.end()) {
        throw std::invalid_argument("chi values must be at least 1");
    }
    const DenseTensor matrix = flatten_agents(mj);
    const std::size_t rows = matrix.dim(0);
    const std::size_t cols = matrix.dim(1);
    const SvdFactors full = svd_full(matrix);

    // Visit chi in ascending order, adding one rank-1 term at a time.
    std::vector<std::size_t> order(chi_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return chi_values[a] < chi_values[b]; });

    std::vector<ScanRecord> out(chi_values.size());
    DenseTensor partial(Shape{rows, cols}, 0.0);
    auto p = partial.data();
    const auto u = full.u.data();
    const auto v = full.v.data();
    const std::size_t k_full = full.chi();
    std::size_t added = 0;
    for (std::size_t idx : order) {
        const std::size_t chi = chi_values[idx];
        for (; added < std::min(chi, k_full); ++added) {
            const double lam = full.lambda[added];
            const double* vrow = v.data() + added * cols;
            for (std::size_t i = 0; i < rows; ++i) {
                const double coeff = u[i * k_full + added] * lam;
                if (coeff == 0.0) continue;
                double* row = p.data() + i * cols;
                for (std::size_t j = 0; j < cols; ++j) row[j] += coeff * vrow[j];
            }
        }
        out[idx] = {chi, sum_abs_difference(partial, matrix), chi * (rows + cols)};
    }
    return out;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRecord>& records) {
    out << "chi,alpha,elements\n";
    for (const auto& r : records) out << fmt::format("{},{:.17g},{}\n", r.chi, r.alpha, r.element_count);
}

BipartiteFactors decompose_policy(const DenseTensor& joint_policy, std::size_t chi, SingularSplit split) {
    if (joint_policy.rank() != 4) {
        throw DimensionMismatchError(fmt::format("joint policy must have rank 4, got {}", joint_policy.rank()));
    }
    constexpr std::size_t left[] = {0, 2};
    constexpr std::size_t right[] = {1, 3};
    return decompose_bipartite(joint_policy, left, right, chi, split);
}

BipartiteFactors decompose_initial(const DenseTensor& p0, std::size_t chi, SingularSplit split) {
    if (p0.rank() != 2) {
        throw DimensionMismatchError(fmt::format("joint initial distribution must have rank 2, got {}", p0.rank()));
    }
    constexpr std::size_t left[] = {0};
    constexpr std::size_t right[] = {1};
    return decompose_bipartite(p0, left, right, chi, split);
}

DecomposedNetwork decompose_network(const FmdpSpec& spec, const TransitionModel& model, const PolicySet& policy,
                                    const InitialDistribution& p0, std::size_t chi_transition,
                                    std::size_t chi_policy, std::size_t chi_initial) {
    if (spec.n_agents != 2) throw std::invalid_argument("decomposition needs a two-agent model");
    check_dimensions(spec, model);
    check_dimensions(spec, policy);
    check_dimensions(spec, p0);
    DecomposedNetwork net;
    for (std::size_t t = 1; t <= spec.horizon; ++t) {
        net.transitions.push_back(decompose_joint(model.at(t), chi_transition));
        net.policies.push_back(decompose_policy(joint_policy_site(policy, t), chi_policy));
    }
    net.initial = decompose_initial(p0.p0, chi_initial);
    net.rewards = build_snake_mpo(spec.horizon, 2, spec.reward_values);
    return net;
}

double expected_return_decomposed(const FmdpSpec& spec, const DecomposedNetwork& network) {
    const std::size_t T = spec.horizon;
    if (spec.n_agents != 2) throw std::invalid_argument("decomposed evaluation needs a two-agent model");
    if (network.transitions.size() != T || network.policies.size() != T) {
        throw DimensionMismatchError(fmt::format("{} transition and {} policy sites for horizon {}",
                                                 network.transitions.size(), network.policies.size(), T));
    }
    if (network.rewards.fused || network.rewards.n_agents != 2 || network.rewards.size() != 2 * T) {
        throw DimensionMismatchError("decomposed evaluation needs the unfused two-agent reward chain");
    }

    // Boundary axes: (s1, s2, reward bond).
    DenseTensor left = contract(network.initial.left, network.initial.right, {{1, 0}});
    left = std::move(left).reshaped(Shape{left.dim(0), left.dim(1), 1});

    for (std::size_t t = 1; t <= T; ++t) {
        const auto& tr = network.transitions[t - 1];
        const auto& pol = network.policies[t - 1];
        // (s1, s2, b) x p1(a1, s1, c) -> (s1, s2, b, a1, c)
        DenseTensor x = contract_shared(left, pol.left, {{0, 1}}, {});
        // x m1(s1', r1, s1, a1, k) -> (s2, b, c, s1', r1, k)
        x = contract(x, tr.m1, {{0, 2}, {3, 3}});
        // x p2(c, a2, s2) -> (s2, b, s1', r1, k, a2)
        x = contract_shared(x, pol.right, {{0, 2}}, {{2, 0}});
        // x m2(k, s2', r2, s2, a2) -> (b, s1', r1, s2', r2)
        x = contract(x, tr.m2, {{0, 3}, {4, 0}, {5, 4}});

        const std::size_t k = 2 * (t - 1);
        const DenseTensor w_first = network.rewards.bond_form(k);
        const DenseTensor w_second = network.rewards.bond_form(k + 1);
        if (network.rewards.sites[k].agent == 1) {
            x = contract(x, w_first, {{0, 0}, {2, 2}});        // (s1', s2', r2, b)
            left = contract(x, w_second, {{3, 0}, {2, 2}});    // (s1', s2', b')
        } else {
            x = contract(x, w_first, {{0, 0}, {4, 2}});        // (s1', r1, s2', b)
            left = contract(x, w_second, {{3, 0}, {1, 2}});    // (s1', s2', b')
        }
    }
    return left.sum();
}

} // namespace tnrl
