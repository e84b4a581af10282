#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace relnet {

/// Dimension sizes, row-major layout. Rank 0 denotes a scalar (one value).
using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Immutable dense array of doubles. A Tensor is a cheap handle: the value
// buffer is shared, and node() identifies the producing operation on the
// recording tape (-1 for constants that no tape has seen).
class Tensor {
  public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values);

    static Tensor scalar(double value);
    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    /// Length-zero vector, shape {0}.
    static Tensor empty_vector();

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_ ? data_->size() : 0); }
    int rank() const { return static_cast<int>(shape_.size()); }

    /// Row/column counts; requires rank 2.
    int64_t rows() const;
    int64_t cols() const;

    const std::vector<double>& data() const { return *data_; }
    double at(int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }
    double at(int64_t r, int64_t c) const;
    /// Sole element of a one-element tensor.
    double value() const;

    int node() const { return node_; }

  private:
    friend class Tape;
    std::shared_ptr<const std::vector<double>> data_;
    Shape shape_;
    int node_ = -1;
};

}  // namespace relnet
