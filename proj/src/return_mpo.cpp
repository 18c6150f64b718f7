#include "tnrl/return_mpo.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <numeric>
#include <stdexcept>

namespace tnrl {

namespace {

enum class Position { only, first, interior, last };

Position position_of(std::size_t k, std::size_t n) {
    if (n == 1) return Position::only;
    if (k == 0) return Position::first;
    if (k + 1 == n) return Position::last;
    return Position::interior;
}

DenseTensor make_site(Position pos, std::span<const double> rewards) {
    const std::size_t n = rewards.size();
    switch (pos) {
    case Position::only:
        return DenseTensor(Shape{n}, std::vector<double>(rewards.begin(), rewards.end()));
    case Position::first: {
        DenseTensor w(Shape{2, n});
        for (std::size_t r = 0; r < n; ++r) {
            w({0, r}) = rewards[r];
            w({1, r}) = 1.0;
        }
        return w;
    }
    case Position::last: {
        DenseTensor w(Shape{2, n});
        for (std::size_t r = 0; r < n; ++r) {
            w({0, r}) = 1.0;
            w({1, r}) = rewards[r];
        }
        return w;
    }
    case Position::interior: {
        DenseTensor w(Shape{2, 2, n});
        for (std::size_t r = 0; r < n; ++r) {
            w({0, 0, r}) = 1.0;
            w({0, 1, r}) = 0.0;
            w({1, 0, r}) = rewards[r];
            w({1, 1, r}) = 1.0;
        }
        return w;
    }
    }
    throw std::logic_error("unreachable");
}

/// Inverse of bond_form for a site at the given chain position.
DenseTensor from_bond_form(const DenseTensor& w, Position pos) {
    const auto& s = w.shape();
    switch (pos) {
    case Position::only:
        return w.reshaped({s[2]});
    case Position::first:
        return w.reshaped({s[1], s[2]});
    case Position::last:
        return w.reshaped({s[0], s[2]});
    case Position::interior:
        return w;
    }
    throw std::logic_error("unreachable");
}

/// Contracts consecutive bond-form sites into (bond_in, r_0, ..., r_k, bond_out).
DenseTensor chain(const ReturnMpo& mpo, std::size_t begin, std::size_t end) {
    DenseTensor acc = mpo.bond_form(begin).permute({0, 2, 1});
    for (std::size_t k = begin + 1; k < end; ++k) {
        const std::size_t last = acc.rank() - 1;
        acc = contract(acc, mpo.bond_form(k), {{last, 0}});
        // (bond_in, r..., bond_out, r_new) -> (bond_in, r..., r_new, bond_out)
        std::vector<std::size_t> perm(acc.rank());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::swap(perm[acc.rank() - 1], perm[acc.rank() - 2]);
        acc = acc.permute(perm);
    }
    return acc;
}

} // namespace

DenseTensor ReturnMpo::bond_form(std::size_t k) const {
    const auto& w = sites.at(k).tensor;
    switch (position_of(k, sites.size())) {
    case Position::only:
        return w.reshaped({1, 1, w.shape()[0]});
    case Position::first:
        return w.reshaped({1, w.shape()[0], w.shape()[1]});
    case Position::last:
        return w.reshaped({w.shape()[0], 1, w.shape()[1]});
    case Position::interior:
        return w;
    }
    throw std::logic_error("unreachable");
}

ReturnMpo build_snake_mpo(std::size_t horizon, std::size_t n_agents,
                          std::span<const double> reward_values) {
    if (horizon == 0 || n_agents == 0) {
        throw std::invalid_argument("return MPO needs horizon >= 1 and n_agents >= 1");
    }
    if (reward_values.empty()) throw std::invalid_argument("return MPO needs at least one reward value");
    ReturnMpo mpo;
    mpo.horizon = horizon;
    mpo.n_agents = n_agents;
    const std::size_t n_sites = horizon * n_agents;
    std::size_t k = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        for (std::size_t j = 0; j < n_agents; ++j) {
            const std::size_t agent = (t % 2 == 1) ? j + 1 : n_agents - j;
            MpoSite site;
            site.tensor = make_site(position_of(k, n_sites), reward_values);
            site.timestep = t;
            site.agent = agent;
            mpo.sites.push_back(std::move(site));
            ++k;
        }
    }
    return mpo;
}

ReturnMpo build_sarl_mpo(std::size_t horizon, std::span<const double> reward_values) {
    return build_snake_mpo(horizon, 1, reward_values);
}

ReturnMpo fuse_per_timestep(const ReturnMpo& mpo) {
    if (mpo.fused) return mpo;
    const std::size_t n = mpo.n_agents;
    ReturnMpo out;
    out.horizon = mpo.horizon;
    out.n_agents = n;
    out.fused = true;
    for (std::size_t t = 0; t < mpo.horizon; ++t) {
        const std::size_t begin = t * n;
        DenseTensor acc = chain(mpo, begin, begin + n);
        // Reorder reward axes from snake order to agent order.
        std::vector<std::size_t> perm{0};
        for (std::size_t agent = 1; agent <= n; ++agent) {
            for (std::size_t j = 0; j < n; ++j) {
                if (mpo.sites[begin + j].agent == agent) perm.push_back(1 + j);
            }
        }
        perm.push_back(acc.rank() - 1);
        acc = acc.permute(perm);
        const std::size_t bond_in = acc.shape().front();
        const std::size_t bond_out = acc.shape().back();
        const std::size_t fused_dim = acc.size() / (bond_in * bond_out);
        // (bond_in, R, bond_out) -> (bond_in, bond_out, R)
        DenseTensor site = acc.reshaped({bond_in, fused_dim, bond_out}).permute({0, 2, 1});
        MpoSite fused_site;
        fused_site.tensor = from_bond_form(site, position_of(t, mpo.horizon));
        fused_site.timestep = t + 1;
        fused_site.agent = 0;
        out.sites.push_back(std::move(fused_site));
    }
    return out;
}

DenseTensor contract_to_full(const ReturnMpo& mpo) {
    if (mpo.sites.empty()) throw std::invalid_argument("empty MPO");
    DenseTensor acc = chain(mpo, 0, mpo.size());
    // Drop the length-1 outer bonds.
    Shape reward_dims(acc.shape().begin() + 1, acc.shape().end() - 1);
    acc = std::move(acc).reshaped(reward_dims);

    std::vector<std::size_t> order(mpo.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = mpo.sites[a];
        const auto& sb = mpo.sites[b];
        return sa.timestep != sb.timestep ? sa.timestep < sb.timestep : sa.agent < sb.agent;
    });
    return acc.permute(order);
}

double mpo_expectation(const ReturnMpo& mpo, const DenseTensor& reward_distribution) {
    const DenseTensor g = contract_to_full(mpo);
    if (g.size() != reward_distribution.size()) {
        throw ShapeMismatchError(fmt::format("reward distribution has {} entries, MPO covers {}",
                                             reward_distribution.size(), g.size()));
    }
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e += g.data()[i] * reward_distribution.data()[i];
    return e;
}

ReturnMpo flat_mpo(std::size_t horizon, std::size_t reward_dim) {
    ReturnMpo mpo;
    mpo.horizon = horizon;
    mpo.n_agents = 1;
    mpo.fused = true;
    for (std::size_t t = 0; t < horizon; ++t) {
        MpoSite site;
        switch (position_of(t, horizon)) {
        case Position::only:
            site.tensor = DenseTensor(Shape{reward_dim}, 1.0);
            break;
        case Position::first:
        case Position::last:
            site.tensor = DenseTensor(Shape{1, reward_dim}, 1.0);
            break;
        case Position::interior:
            site.tensor = DenseTensor(Shape{1, 1, reward_dim}, 1.0);
            break;
        }
        site.timestep = t + 1;
        mpo.sites.push_back(std::move(site));
    }
    return mpo;
}

} // namespace tnrl
