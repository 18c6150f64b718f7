#pragma once

#include "tnrl/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tnrl {

/// One tensor of the reward-summing chain. `timestep` is 1-based, `agent` is
/// 1-based for unfused sites (agent 1 in a single-agent chain) and 0 for fused ones.
struct MpoSite {
    DenseTensor tensor;
    std::size_t timestep = 1;
    std::size_t agent = 0;
};

/// Matrix product operator whose contraction with a reward distribution is
/// the expected summed reward.
///
/// Site tensors, bond dimension 2: first (bond, reward) = [R, 1];
/// interior (bond_in, bond_out, reward) = [[1, 0], [R, 1]];
/// last (bond, reward) = [1; R]. A one-site chain is the rank-1 vector R.
struct ReturnMpo {
    std::vector<MpoSite> sites;
    std::size_t horizon = 0;
    std::size_t n_agents = 1;
    /// True once the per-agent sites of each timestep have been fused.
    bool fused = false;

    [[nodiscard]] std::size_t size() const noexcept { return sites.size(); }
    /// Site k as a rank-3 (bond_in, bond_out, reward) tensor; the outer bonds
    /// of the chain have length 1.
    [[nodiscard]] DenseTensor bond_form(std::size_t k) const;
};

[[nodiscard]] ReturnMpo build_sarl_mpo(std::size_t horizon, std::span<const double> reward_values);

/// n_agents·T sites in snake order: t=1 visits agents 1..n, t=2 visits n..1, and so on.
[[nodiscard]] ReturnMpo build_snake_mpo(std::size_t horizon, std::size_t n_agents,
                                        std::span<const double> reward_values);

/// Contracts the sites of each timestep into one site whose reward axis is
/// the fused (r1, r2, ..., rn) axis, ordered by agent id, row-major.
[[nodiscard]] ReturnMpo fuse_per_timestep(const ReturnMpo& mpo);

/// Returns the MPO contracted into one tensor with one reward axis per site,
/// axes ordered by (timestep, agent). Meant for small instances.
[[nodiscard]] DenseTensor contract_to_full(const ReturnMpo& mpo);

/// Expected summed reward under a distribution over all reward axes,
/// ordered by (timestep, agent). Fused and unfused chains accept the same
/// flat data.
[[nodiscard]] double mpo_expectation(const ReturnMpo& mpo, const DenseTensor& reward_distribution);

/// Chain of all-ones sites with bond dimension 1: marginalises every reward.
[[nodiscard]] ReturnMpo flat_mpo(std::size_t horizon, std::size_t reward_dim);

} // namespace tnrl
