#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tnrl {

using Shape = std::vector<std::size_t>;
using Index = std::vector<std::size_t>;

/// Base class for all errors raised by the tensor layer.
class TensorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatchError : public TensorError {
public:
    using TensorError::TensorError;
};

class DuplicateAxisError : public TensorError {
public:
    using TensorError::TensorError;
};

/// Pair of axes to be summed over: (axis of the left operand, axis of the right operand).
struct AxisPair {
    std::size_t left;
    std::size_t right;
};

/// Dense n-dimensional array of doubles in row-major order.
///
/// Rank 0 is a scalar holding exactly one element. Axis labels are optional
/// metadata; when present there is one per axis. Operations never read them.
class DenseTensor {
public:
    DenseTensor();
    explicit DenseTensor(Shape shape, double fill = 0.0);
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor scalar(double value);
    static DenseTensor vector(std::vector<double> values);
    static DenseTensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t axis) const;

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels);
    [[nodiscard]] DenseTensor with_labels(std::vector<std::string> labels) const;

    /// Row-major strides, in elements.
    [[nodiscard]] std::vector<std::size_t> strides() const;
    [[nodiscard]] std::size_t offset(std::span<const std::size_t> index) const;
    [[nodiscard]] Index unravel(std::size_t offset) const;

    [[nodiscard]] double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
    [[nodiscard]] double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& operator()(std::initializer_list<std::size_t> index);
    double operator()(std::initializer_list<std::size_t> index) const;

    /// Value of a tensor holding a single element (any rank with all axes of length 1).
    [[nodiscard]] double item() const;

    /// Reorders axes: result axis k is input axis perm[k].
    [[nodiscard]] DenseTensor permute(std::span<const std::size_t> perm) const;
    [[nodiscard]] DenseTensor permute(std::initializer_list<std::size_t> perm) const;

    /// Reinterprets the flat data under a new shape of equal size. Labels are dropped.
    [[nodiscard]] DenseTensor reshaped(Shape new_shape) const&;
    [[nodiscard]] DenseTensor reshaped(Shape new_shape) &&;

    [[nodiscard]] double sum() const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double factor);

    friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
    std::vector<std::string> labels_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double factor, DenseTensor a);

[[nodiscard]] std::size_t product(std::span<const std::size_t> dims);

/// Sums over the paired axes. Result axes: uncontracted axes of `a` in order,
/// then uncontracted axes of `b` in order. Each output element accumulates its
/// terms in ascending order of the flattened contracted index.
[[nodiscard]] DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                                   std::span<const AxisPair> pairs);
[[nodiscard]] DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                                   std::initializer_list<AxisPair> pairs);

/// Contraction through a copy tensor: axes in `shared` are identified (kept once)
/// rather than summed, axes in `summed` are summed. Result axes: shared axes (in
/// the order given), free axes of `a`, free axes of `b`.
[[nodiscard]] DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b,
                                          std::span<const AxisPair> shared,
                                          std::span<const AxisPair> summed);
[[nodiscard]] DenseTensor contract_shared(const DenseTensor& a, const DenseTensor& b,
                                          std::initializer_list<AxisPair> shared,
                                          std::initializer_list<AxisPair> summed);

/// Tensor product: shape is concat(shape(a), shape(b)).
[[nodiscard]] DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

/// Permutes axes by `axis_order` and then regroups the result into `new_shape`
/// (row-major). Grouping runs of consecutive permuted axes is the usual use.
[[nodiscard]] DenseTensor reshape(const DenseTensor& a, Shape new_shape,
                                  std::span<const std::size_t> axis_order);
[[nodiscard]] DenseTensor reshape(const DenseTensor& a, Shape new_shape);

[[nodiscard]] double max_abs_difference(const DenseTensor& a, const DenseTensor& b);
[[nodiscard]] double sum_abs_difference(const DenseTensor& a, const DenseTensor& b);
[[nodiscard]] double frobenius_norm(const DenseTensor& a);

/// Full contraction of two tensors with identical shape.
[[nodiscard]] double inner(const DenseTensor& a, const DenseTensor& b);

} // namespace tnrl
