#include "tnrl/policy_optimizer.hpp"

#include <algorithm>
#include <array>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <stdexcept>

namespace tnrl {

namespace {

struct UpdateResult {
    DenseTensor pi;
    std::size_t changed = 0;
};

UpdateResult greedy_columns(const DenseTensor& z, const DenseTensor& pi, std::size_t action_axes) {
    if (z.shape() != pi.shape()) {
        throw ShapeMismatchError(fmt::format("environment shape {} differs from policy shape {}",
                                             z.shape(), pi.shape()));
    }
    if (action_axes == 0 || action_axes >= z.rank()) {
        throw std::invalid_argument(
            fmt::format("{} action axes do not fit a rank-{} policy", action_axes, z.rank()));
    }
    const std::size_t n_act = product(std::span(z.shape()).first(action_axes));
    const std::size_t n_col = z.size() / n_act;
    const auto zd = z.data();

    UpdateResult out{pi, 0};
    auto pd = out.pi.data();
    for (std::size_t c = 0; c < n_col; ++c) {
        double best = zd[c];
        double worst = zd[c];
        for (std::size_t a = 1; a < n_act; ++a) {
            best = std::max(best, zd[a * n_col + c]);
            worst = std::min(worst, zd[a * n_col + c]);
        }
        if (best - worst <= kTieTolerance) continue;
        std::size_t choice = 0;
        while (zd[choice * n_col + c] < best - kTieTolerance) ++choice;
        bool changed = false;
        for (std::size_t a = 0; a < n_act; ++a) {
            const double v = a == choice ? 1.0 : 0.0;
            if (pd[a * n_col + c] != v) changed = true;
            pd[a * n_col + c] = v;
        }
        if (changed) ++out.changed;
    }
    return out;
}

void check_inputs(const FmdpSpec& spec, const TransitionModel& model, const PolicySet& policy,
                  const InitialDistribution& p0) {
    spec.check();
    check_dimensions(spec, model);
    check_dimensions(spec, policy);
    check_dimensions(spec, p0);
    require_valid(model);
    require_valid(policy);
    require_valid(p0);
}

// One backward sweep over sites holding the whole grouped action (single or joint).
void sweep_grouped(const ReturnNetwork& net, PolicySet& policy, SweepReport& report) {
    const std::size_t T = net.spec().horizon;
    const std::size_t axes = policy.action_axes();
    const auto lefts = net.left_boundaries(policy);
    DenseTensor right = net.terminal_right();
    for (std::size_t t = T; t >= 1; --t) {
        const DenseTensor values = net.action_values(right, t);
        DenseTensor& site = policy.at(t);
        const DenseTensor z = net.environment(lefts[t - 1], values).reshaped(site.shape());
        auto [updated, changed] = greedy_columns(z, site, axes);
        site = std::move(updated);
        report.site_order.push_back({t, 0});
        report.returns_after_each_update.push_back(inner(z, site));
        report.columns_changed.push_back(changed);
        right = net.retreat_right(values, joint_policy_site(policy, t));
    }
    ++report.n_sweeps;
}

// One backward sweep over per-agent sites; `order` lists the agents visited at each timestep.
std::size_t sweep_per_agent(const ReturnNetwork& net, PolicySet& policy, const std::array<std::size_t, 2>& order,
                            SweepReport& report) {
    const FmdpSpec& spec = net.spec();
    const auto lefts = net.left_boundaries(policy);
    DenseTensor right = net.terminal_right();
    std::size_t total_changed = 0;
    for (std::size_t t = spec.horizon; t >= 1; --t) {
        const DenseTensor values = net.action_values(right, t);
        const DenseTensor zj = net.environment(lefts[t - 1], values);
        for (const std::size_t agent : order) {
            const DenseTensor z =
                agent_environment(zj, policy.at(t, 1 - agent), agent, spec.n_actions, spec.n_states);
            DenseTensor& site = policy.at(t, agent);
            auto [updated, changed] = greedy_columns(z, site, 1);
            site = std::move(updated);
            report.site_order.push_back({t, agent});
            report.returns_after_each_update.push_back(inner(z, site));
            report.columns_changed.push_back(changed);
            total_changed += changed;
        }
        right = net.retreat_right(values, joint_policy_site(policy, t));
    }
    ++report.n_sweeps;
    return total_changed;
}

} // namespace

DenseTensor greedy_update(const DenseTensor& z, const DenseTensor& pi, std::size_t action_axes) {
    return greedy_columns(z, pi, action_axes).pi;
}

std::pair<PolicySet, SweepReport> optimize_sarl(const FmdpSpec& spec, const TransitionModel& model,
                                                const PolicySet& policy, const InitialDistribution& p0) {
    if (spec.n_agents != 1 || policy.kind != PolicyKind::single) {
        throw std::invalid_argument("optimize_sarl needs a single-agent spec and policy");
    }
    check_inputs(spec, model, policy, p0);
    const ReturnNetwork net(spec, model, p0);
    PolicySet out = policy;
    SweepReport report;
    sweep_grouped(net, out, report);
    report.converged = true;
    return {std::move(out), std::move(report)};
}

std::pair<PolicySet, SweepReport> optimize_marl(const FmdpSpec& spec, const TransitionModel& model,
                                                const PolicySet& policies, const InitialDistribution& p0,
                                                MarlMode mode) {
    if (spec.n_agents != 2) throw std::invalid_argument("optimize_marl needs a two-agent spec");
    const PolicyKind expected = mode == MarlMode::joint ? PolicyKind::joint : PolicyKind::per_agent;
    if (policies.kind != expected) {
        throw std::invalid_argument("policy kind does not match the optimisation mode");
    }
    check_inputs(spec, model, policies, p0);
    const ReturnNetwork net(spec, model, p0);
    PolicySet out = policies;
    SweepReport report;
    if (mode == MarlMode::joint) {
        sweep_grouped(net, out, report);
        report.converged = true;
    } else {
        sweep_per_agent(net, out, {0, 1}, report);
        const std::size_t second = sweep_per_agent(net, out, {1, 0}, report);
        report.converged = second == 0;
    }
    return {std::move(out), std::move(report)};
}

} // namespace tnrl
