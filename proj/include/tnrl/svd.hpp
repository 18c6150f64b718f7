#pragma once

#include "tnrl/tensor.hpp"

#include <cstddef>
#include <vector>

namespace tnrl {

/// Truncated singular value decomposition m ≈ u · diag(lambda) · v.
///
/// u is m×χ with orthonormal columns, v is χ×n with orthonormal rows and
/// lambda is non-negative and descending. The sign of each singular pair is
/// fixed so that the largest-magnitude entry of every column of u is
/// positive (first such entry on exact ties).
struct SvdFactors {
    DenseTensor u;
    std::vector<double> lambda;
    DenseTensor v;

    [[nodiscard]] std::size_t chi() const noexcept { return lambda.size(); }
    /// u · diag(lambda) · v as an m×n matrix.
    [[nodiscard]] DenseTensor reconstruct() const;
};

/// Keeps the top min(chi, min(m, n)) singular triples of a rank-2 tensor.
/// Zero singular values are kept when chi asks for them.
[[nodiscard]] SvdFactors svd_truncated(const DenseTensor& m, std::size_t chi);

/// Full thin SVD (chi = min(m, n)).
[[nodiscard]] SvdFactors svd_full(const DenseTensor& m);

/// First `chi` triples of an already computed decomposition.
[[nodiscard]] SvdFactors truncate(const SvdFactors& full, std::size_t chi);

/// Number of singular values above `tolerance`.
[[nodiscard]] std::size_t numerical_rank(const SvdFactors& f, double tolerance);

} // namespace tnrl
