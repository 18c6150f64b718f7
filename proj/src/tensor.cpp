#include "tnrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <functional>
#include <numeric>
#include <optional>

namespace tnrl {

namespace {

void check_permutation(std::span<const std::size_t> perm, std::size_t rank) {
    if (perm.size() != rank) {
        throw ShapeMismatchError(
            fmt::format("permutation has {} entries for a rank-{} tensor", perm.size(), rank));
    }
    std::vector<bool> seen(rank, false);
    for (auto axis : perm) {
        if (axis >= rank) {
            throw ShapeMismatchError(fmt::format("axis {} out of range for rank {}", axis, rank));
        }
        if (seen[axis]) {
            throw DuplicateAxisError(fmt::format("axis {} appears twice in permutation", axis));
        }
        seen[axis] = true;
    }
}

bool is_identity(std::span<const std::size_t> perm) {
    for (std::size_t k = 0; k < perm.size(); ++k) {
        if (perm[k] != k) return false;
    }
    return true;
}

void permute_into(std::span<const double> src, const Shape& shape,
                  std::span<const std::size_t> perm, std::vector<double>& dst) {
    const std::size_t rank = shape.size();
    dst.resize(src.size());
    if (src.empty()) return;
    if (rank == 0) {
        dst[0] = src[0];
        return;
    }
    std::vector<std::size_t> src_strides(rank, 1);
    for (std::size_t k = rank; k-- > 1;) src_strides[k - 1] = src_strides[k] * shape[k];

    Shape out_shape(rank);
    std::vector<std::size_t> step(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        out_shape[k] = shape[perm[k]];
        step[k] = src_strides[perm[k]];
    }
    // Odometer over the output index; the innermost axis is a strided copy.
    std::vector<std::size_t> counter(rank, 0);
    std::size_t src_pos = 0;
    const std::size_t inner_len = out_shape[rank - 1];
    const std::size_t inner_step = step[rank - 1];
    for (std::size_t out = 0; out < dst.size(); out += inner_len) {
        for (std::size_t i = 0; i < inner_len; ++i) dst[out + i] = src[src_pos + i * inner_step];
        for (std::size_t k = rank - 1; k-- > 0;) {
            src_pos += step[k];
            if (++counter[k] < out_shape[k]) break;
            src_pos -= step[k] * out_shape[k];
            counter[k] = 0;
        }
    }
}

/// Operand data arranged in a requested axis order, copying only when needed.
struct Arranged {
    std::span<const double> view;
    std::vector<double> owned;
};

Arranged arrange(const DenseTensor& t, std::span<const std::size_t> perm) {
    Arranged out;
    if (is_identity(perm)) {
        out.view = t.data();
    } else {
        permute_into(t.data(), t.shape(), perm, out.owned);
        out.view = out.owned;
    }
    return out;
}

void check_pairs(const DenseTensor& a, const DenseTensor& b, std::span<const AxisPair> pairs,
                 std::vector<bool>& used_a, std::vector<bool>& used_b) {
    for (const auto& p : pairs) {
        if (p.left >= a.rank() || p.right >= b.rank()) {
            throw ShapeMismatchError(fmt::format("axis pair ({}, {}) out of range for ranks {} and {}",
                                                 p.left, p.right, a.rank(), b.rank()));
        }
        if (used_a[p.left]) {
            throw DuplicateAxisError(fmt::format("axis {} of the left operand used twice", p.left));
        }
        if (used_b[p.right]) {
            throw DuplicateAxisError(fmt::format("axis {} of the right operand used twice", p.right));
        }
        if (a.dim(p.left) != b.dim(p.right)) {
            throw ShapeMismatchError(fmt::format(
                "cannot pair left axis {} (length {}) with right axis {} (length {})", p.left,
                a.dim(p.left), p.right, b.dim(p.right)));
        }
        used_a[p.left] = true;
        used_b[p.right] = true;
    }
}

} // namespace

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor() : data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (product(shape_) != data_.size()) {
        throw ShapeMismatchError(fmt::format("shape {} needs {} elements, got {}", shape_,
                                             product(shape_), data_.size()));
    }
}

DenseTensor DenseTensor::scalar(double value) { return DenseTensor(Shape{}, std::vector<double>{value}); }

DenseTensor DenseTensor::vector(std::vector<double> values) {
    const auto n = values.size();
    return DenseTensor(Shape{n}, std::move(values));
}

DenseTensor DenseTensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return DenseTensor(Shape{rows, cols}, std::move(values));
}

std::size_t DenseTensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeMismatchError(fmt::format("axis {} out of range for rank {}", axis, shape_.size()));
    }
    return shape_[axis];
}

void DenseTensor::set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != shape_.size()) {
        throw ShapeMismatchError(
            fmt::format("{} labels given for a rank-{} tensor", labels.size(), shape_.size()));
    }
    labels_ = std::move(labels);
}

DenseTensor DenseTensor::with_labels(std::vector<std::string> labels) const {
    DenseTensor out = *this;
    out.set_labels(std::move(labels));
    return out;
}

std::vector<std::size_t> DenseTensor::strides() const {
    std::vector<std::size_t> s(shape_.size(), 1);
    for (std::size_t k = shape_.size(); k-- > 1;) s[k - 1] = s[k] * shape_[k];
    return s;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw ShapeMismatchError(
            fmt::format("index of length {} for a rank-{} tensor", index.size(), shape_.size()));
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (index[k] >= shape_[k]) {
            throw ShapeMismatchError(
                fmt::format("index {} out of range on axis {} of length {}", index[k], k, shape_[k]));
        }
        pos = pos * shape_[k] + index[k];
    }
    return pos;
}

Index DenseTensor::unravel(std::size_t offset) const {
    Index idx(shape_.size(), 0);
    for (std::size_t k = shape_.size(); k-- > 0;) {
        idx[k] = offset % shape_[k];
        offset /= shape_[k];
    }
    return idx;
}

double& DenseTensor::operator()(std::initializer_list<std::size_t> index) {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::item() const {
    if (data_.size() != 1) {
        throw ShapeMismatchError(fmt::format("item() on a tensor with {} elements", data_.size()));
    }
    return data_[0];
}

DenseTensor DenseTensor::permute(std::span<const std::size_t> perm) const {
    check_permutation(perm, rank());
    Shape out_shape(rank());
    for (std::size_t k = 0; k < rank(); ++k) out_shape[k] = shape_[perm[k]];
    std::vector<double> out;
    permute_into(data_, shape_, perm, out);
    DenseTensor result(std::move(out_shape), std::move(out));
    if (!labels_.empty()) {
        std::vector<std::string> labels(rank());
        for (std::size_t k = 0; k < rank(); ++k) labels[k] = labels_[perm[k]];
        result.labels_ = std::move(labels);
    }
    return result;
}

DenseTensor DenseTensor::permute(std::initializer_list<std::size_t> perm) const {
    return permute(std::span<const std::size_t>(perm.begin(), perm.size()));
}

DenseTensor DenseTensor::reshaped(Shape new_shape) const& {
    return DenseTensor(*this).reshaped(std::move(new_shape));
}

DenseTensor DenseTensor::reshaped(Shape new_shape) && {
    if (product(new_shape) != data_.size()) {
        throw ShapeMismatchError(fmt::format("cannot reshape {} elements into shape {}", data_.size(),
                                             new_shape));
    }
    return DenseTensor(std::move(new_shape), std::move(data_));
}

double DenseTensor::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (other.shape_ != shape_) {
        throw ShapeMismatchError(fmt::format("cannot add shape {} to shape {}", other.shape_, shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (other.shape_ != shape_) {
        throw ShapeMismatchError(
            fmt::format("cannot subtract shape {} from shape {}", other.shape_, shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double factor) {
    for (double& v : data_) v *= factor;
    return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double factor, DenseTensor a) { return a *= factor; }

DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b,
                            std::span<const AxisPair> shared, std::span<const AxisPair> summed) {
    std::vector<bool> used_a(a.rank(), false);
    std::vector<bool> used_b(b.rank(), false);
    check_pairs(a, b, shared, used_a, used_b);
    check_pairs(a, b, summed, used_a, used_b);

    // a -> (shared, free, summed); b -> (shared, summed, free)
    std::vector<std::size_t> perm_a;
    std::vector<std::size_t> perm_b;
    Shape out_shape;
    std::size_t batch = 1;
    for (const auto& p : shared) {
        perm_a.push_back(p.left);
        perm_b.push_back(p.right);
        out_shape.push_back(a.dim(p.left));
        batch *= a.dim(p.left);
    }
    std::size_t rows = 1;
    for (std::size_t k = 0; k < a.rank(); ++k) {
        if (!used_a[k]) {
            perm_a.push_back(k);
            out_shape.push_back(a.dim(k));
            rows *= a.dim(k);
        }
    }
    std::size_t inner_len = 1;
    for (const auto& p : summed) {
        perm_a.push_back(p.left);
        perm_b.push_back(p.right);
        inner_len *= a.dim(p.left);
    }
    std::size_t cols = 1;
    for (std::size_t k = 0; k < b.rank(); ++k) {
        if (!used_b[k]) {
            perm_b.push_back(k);
            out_shape.push_back(b.dim(k));
            cols *= b.dim(k);
        }
    }

    const Arranged lhs = arrange(a, perm_a);
    const Arranged rhs = arrange(b, perm_b);
    std::vector<double> out(batch * rows * cols, 0.0);
    for (std::size_t g = 0; g < batch; ++g) {
        const double* A = lhs.view.data() + g * rows * inner_len;
        const double* B = rhs.view.data() + g * inner_len * cols;
        double* C = out.data() + g * rows * cols;
        for (std::size_t i = 0; i < rows; ++i) {
            double* c_row = C + i * cols;
            const double* a_row = A + i * inner_len;
            for (std::size_t k = 0; k < inner_len; ++k) {
                const double aik = a_row[k];
                if (aik == 0.0) continue;
                const double* b_row = B + k * cols;
                for (std::size_t j = 0; j < cols; ++j) c_row[j] += aik * b_row[j];
            }
        }
    }
    return DenseTensor(std::move(out_shape), std::move(out));
}

DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b,
                            std::initializer_list<AxisPair> shared,
                            std::initializer_list<AxisPair> summed) {
    return contract_shared(a, b, std::span<const AxisPair>(shared.begin(), shared.size()),
                           std::span<const AxisPair>(summed.begin(), summed.size()));
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::span<const AxisPair> pairs) {
    return contract_shared(a, b, std::span<const AxisPair>{}, pairs);
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<AxisPair> pairs) {
    return contract(a, b, std::span<const AxisPair>(pairs.begin(), pairs.size()));
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
    Shape shape = a.shape();
    shape.insert(shape.end(), b.shape().begin(), b.shape().end());
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (double x : a.data()) {
        for (double y : b.data()) out.push_back(x * y);
    }
    return DenseTensor(std::move(shape), std::move(out));
}

DenseTensor reshape(const DenseTensor& a, Shape new_shape, std::span<const std::size_t> axis_order) {
    if (product(new_shape) != a.size()) {
        throw ShapeMismatchError(
            fmt::format("cannot reshape {} elements into shape {}", a.size(), new_shape));
    }
    return a.permute(axis_order).reshaped(std::move(new_shape));
}

DenseTensor reshape(const DenseTensor& a, Shape new_shape) { return a.reshaped(std::move(new_shape)); }

double max_abs_difference(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeMismatchError(fmt::format("shapes {} and {} differ", a.shape(), b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double sum_abs_difference(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeMismatchError(fmt::format("shapes {} and {} differ", a.shape(), b.shape()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
    return s;
}

double frobenius_norm(const DenseTensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeMismatchError(fmt::format("shapes {} and {} differ", a.shape(), b.shape()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

} // namespace tnrl
