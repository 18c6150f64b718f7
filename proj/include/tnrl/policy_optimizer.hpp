#pragma once

#include "tnrl/contraction.hpp"
#include "tnrl/fmdp.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace tnrl {

/// Action values closer than this count as equal.
constexpr double kTieTolerance = 1e-12;

struct SiteVisit {
    std::size_t timestep = 1;
    std::size_t agent = 0;  ///< 0-based; 0 for single-agent and joint sites
    bool operator==(const SiteVisit&) const = default;
};

struct SweepReport {
    std::vector<SiteVisit> site_order;
    std::vector<double> returns_after_each_update;
    /// Number of state columns rewritten at each visit.
    std::vector<std::size_t> columns_changed;
    bool converged = false;
    std::size_t n_sweeps = 0;
};

enum class MarlMode { joint, per_agent };

/// Greedy single-site update of one policy tensor against its environment.
///
/// z and pi share a shape whose first `action_axes` axes are actions and
/// the rest states. For each state column: if every action value is within
/// kTieTolerance of the maximum the column is left as is; otherwise it
/// becomes the one-hot of the lowest-index action within kTieTolerance of
/// the maximum.
[[nodiscard]] DenseTensor greedy_update(const DenseTensor& z, const DenseTensor& pi,
                                        std::size_t action_axes = 1);

/// One backward sweep t = T..1 over a single-agent policy.
[[nodiscard]] std::pair<PolicySet, SweepReport> optimize_sarl(const FmdpSpec& spec,
                                                              const TransitionModel& model,
                                                              const PolicySet& policy,
                                                              const InitialDistribution& p0);

/// Two-agent optimisation.
///
/// joint: one backward sweep over joint policy sites, greedy over the joint
/// action pair. per_agent: two backward sweeps; the first visits agents
/// 1, 2 within each timestep, the second 2, 1.
[[nodiscard]] std::pair<PolicySet, SweepReport> optimize_marl(const FmdpSpec& spec,
                                                              const TransitionModel& model,
                                                              const PolicySet& policies,
                                                              const InitialDistribution& p0,
                                                              MarlMode mode = MarlMode::joint);

} // namespace tnrl
