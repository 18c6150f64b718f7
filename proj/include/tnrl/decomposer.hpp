#pragma once

#include "tnrl/fmdp.hpp"
#include "tnrl/return_mpo.hpp"
#include "tnrl/svd.hpp"
#include "tnrl/tensor.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace tnrl {

/// Where the singular values go when a matrix is split into two factors.
enum class SingularSplit {
    symmetric,  ///< each factor absorbs sqrt(lambda)
    into_right  ///< the right factor absorbs lambda
};

/// A tensor split into two factors joined by one bond.
///
/// left has the left-group axes followed by the bond; right has the bond
/// followed by the right-group axes.
struct BipartiteFactors {
    DenseTensor left;
    DenseTensor right;
    std::vector<double> singular_values;

    [[nodiscard]] std::size_t chi() const noexcept { return singular_values.size(); }
};

/// Groups `left_axes` against `right_axes` (together a permutation of all
/// axes), keeps the top chi singular triples and unflattens the factors.
[[nodiscard]] BipartiteFactors decompose_bipartite(const DenseTensor& t, std::span<const std::size_t> left_axes,
                                                   std::span<const std::size_t> right_axes, std::size_t chi,
                                                   SingularSplit split = SingularSplit::symmetric);

/// Two-agent transition tensor as per-agent factors.
///
/// m1 axes (s1', r1, s1, a1, bond); m2 axes (bond, s2', r2, s2, a2). Factor
/// entries are not probabilities.
struct DecomposedTransition {
    DenseTensor m1;
    DenseTensor m2;
    std::size_t chi = 0;
    std::vector<double> singular_values;
};

/// Splits a rank-8 joint transition tensor between the two agents.
[[nodiscard]] DecomposedTransition decompose_joint(const DenseTensor& mj, std::size_t chi,
                                                   SingularSplit split = SingularSplit::symmetric);

/// Contracts the factors back into the joint axis order.
[[nodiscard]] DenseTensor reconstruct_joint(const DecomposedTransition& d);

/// Sum of absolute element-wise differences between the reconstruction and mj.
[[nodiscard]] double reconstruction_error(const DenseTensor& mj, const DecomposedTransition& d);

struct ScanRecord {
    std::size_t chi = 0;
    double alpha = 0.0;
    std::size_t element_count = 0;  ///< entries of both factors: chi (rows + cols)
};

/// Reconstruction error for each requested bond length from one full SVD.
[[nodiscard]] std::vector<ScanRecord> svd_scan(const DenseTensor& mj, std::span<const std::size_t> chi_values);

/// CSV with header chi,alpha,elements.
void write_scan_csv(std::ostream& out, const std::vector<ScanRecord>& records);

/// Joint policy π(a1, a2, s1, s2) split as (a1, s1, bond) and (bond, a2, s2).
[[nodiscard]] BipartiteFactors decompose_policy(const DenseTensor& joint_policy, std::size_t chi,
                                                SingularSplit split = SingularSplit::symmetric);
/// Initial distribution p0(s1, s2) split as (s1, bond) and (bond, s2).
[[nodiscard]] BipartiteFactors decompose_initial(const DenseTensor& p0, std::size_t chi,
                                                 SingularSplit split = SingularSplit::symmetric);

/// All tensors of a two-agent network in decomposed form.
struct DecomposedNetwork {
    std::vector<DecomposedTransition> transitions;  ///< one per timestep
    std::vector<BipartiteFactors> policies;         ///< one per timestep
    BipartiteFactors initial;
    ReturnMpo rewards;  ///< unfused snake chain
};

/// Decomposes every tensor of a joint two-agent network. Each family has its
/// own bond length.
[[nodiscard]] DecomposedNetwork decompose_network(const FmdpSpec& spec, const TransitionModel& model,
                                                  const PolicySet& policy, const InitialDistribution& p0,
                                                  std::size_t chi_transition, std::size_t chi_policy,
                                                  std::size_t chi_initial);

/// Expected return of the decomposed network.
///
/// The agents' chains are contracted timestep by timestep; each state index
/// feeds both its policy factor and its transition factor through a copy
/// tensor, and the unfused reward chain visits the agents in snake order.
[[nodiscard]] double expected_return_decomposed(const FmdpSpec& spec, const DecomposedNetwork& network);

} // namespace tnrl
