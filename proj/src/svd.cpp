#include "tnrl/svd.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace tnrl {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Below this size Jacobi is both fast and the most accurate choice.
constexpr Eigen::Index kJacobiLimit = 64;

void require_matrix(const DenseTensor& m) {
    if (m.rank() != 2) {
        throw TensorError(fmt::format("svd needs a rank-2 tensor, got rank {}", m.rank()));
    }
}

template <typename Solver>
SvdFactors pack(const Solver& svd, Eigen::Index rows, Eigen::Index cols, std::size_t keep) {
    const Eigen::MatrixXd& U = svd.matrixU();
    const Eigen::MatrixXd& V = svd.matrixV();
    const auto& s = svd.singularValues();
    const auto chi = static_cast<Eigen::Index>(keep);

    SvdFactors f;
    f.u = DenseTensor(Shape{static_cast<std::size_t>(rows), keep});
    f.v = DenseTensor(Shape{keep, static_cast<std::size_t>(cols)});
    f.lambda.resize(keep);
    for (Eigen::Index k = 0; k < chi; ++k) {
        // Sign convention: largest |u_ik| of each left vector is positive.
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double mag = std::abs(U(i, k));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        const double sign = U(pivot, k) < 0.0 ? -1.0 : 1.0;
        f.lambda[static_cast<std::size_t>(k)] = std::max(0.0, s(k));
        for (Eigen::Index i = 0; i < rows; ++i) {
            f.u.data()[static_cast<std::size_t>(i * chi + k)] = sign * U(i, k);
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            f.v.data()[static_cast<std::size_t>(k * cols + j)] = sign * V(j, k);
        }
    }
    return f;
}

} // namespace

DenseTensor SvdFactors::reconstruct() const {
    const std::size_t rows = u.shape()[0];
    const std::size_t cols = v.shape()[1];
    const std::size_t k_max = lambda.size();
    std::vector<double> out(rows * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = out.data() + i * cols;
        for (std::size_t k = 0; k < k_max; ++k) {
            const double coeff = u.data()[i * k_max + k] * lambda[k];
            if (coeff == 0.0) continue;
            const double* vrow = v.data().data() + k * cols;
            for (std::size_t j = 0; j < cols; ++j) row[j] += coeff * vrow[j];
        }
    }
    return DenseTensor(Shape{rows, cols}, std::move(out));
}

SvdFactors svd_truncated(const DenseTensor& m, std::size_t chi) {
    require_matrix(m);
    if (chi == 0) throw TensorError("svd chi must be at least 1");
    const auto rows = static_cast<Eigen::Index>(m.shape()[0]);
    const auto cols = static_cast<Eigen::Index>(m.shape()[1]);
    const Eigen::Map<const RowMatrix> A(m.data().data(), rows, cols);
    const std::size_t keep = std::min<std::size_t>(chi, static_cast<std::size_t>(std::min(rows, cols)));

    constexpr int options = Eigen::ComputeThinU | Eigen::ComputeThinV;
    if (std::max(rows, cols) <= kJacobiLimit) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, options);
        return pack(svd, rows, cols, keep);
    }
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(A, options);
    return pack(svd, rows, cols, keep);
}

SvdFactors svd_full(const DenseTensor& m) {
    require_matrix(m);
    return svd_truncated(m, std::max<std::size_t>(1, std::min(m.shape()[0], m.shape()[1])));
}

SvdFactors truncate(const SvdFactors& full, std::size_t chi) {
    if (chi == 0) throw TensorError("svd chi must be at least 1");
    const std::size_t keep = std::min(chi, full.chi());
    const std::size_t rows = full.u.shape()[0];
    const std::size_t cols = full.v.shape()[1];
    SvdFactors f;
    f.lambda.assign(full.lambda.begin(), full.lambda.begin() + static_cast<std::ptrdiff_t>(keep));
    f.u = DenseTensor(Shape{rows, keep});
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < keep; ++k) f.u.data()[i * keep + k] = full.u.data()[i * full.chi() + k];
    }
    std::vector<double> vdata(full.v.data().begin(),
                              full.v.data().begin() + static_cast<std::ptrdiff_t>(keep * cols));
    f.v = DenseTensor(Shape{keep, cols}, std::move(vdata));
    return f;
}

std::size_t numerical_rank(const SvdFactors& f, double tolerance) {
    return static_cast<std::size_t>(
        std::count_if(f.lambda.begin(), f.lambda.end(), [&](double s) { return s > tolerance; }));
}

} // namespace tnrl
