#include "relnet/tensor.hpp"

#include <sstream>

#include "relnet/errors.hpp"

namespace relnet {

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) out << ", ";
        out << shape[i];
    }
    out << "]";
    return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
    for (int64_t d : shape_) {
        if (d < 0) {
            throw ShapeError("negative dimension in shape " + shape_str(shape_));
        }
    }
    if (shape_numel(shape_) != static_cast<int64_t>(values.size())) {
        throw ShapeError("shape " + shape_str(shape_) + " does not match value count " +
                         std::to_string(values.size()));
    }
    data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::zeros(Shape shape) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), value));
}

Tensor Tensor::empty_vector() { return Tensor(Shape{0}, {}); }

int64_t Tensor::rows() const {
    if (rank() != 2) {
        throw ShapeError("rows() requires a rank-2 tensor, got shape " + shape_str(shape_));
    }
    return shape_[0];
}

int64_t Tensor::cols() const {
    if (rank() != 2) {
        throw ShapeError("cols() requires a rank-2 tensor, got shape " + shape_str(shape_));
    }
    return shape_[1];
}

double Tensor::at(int64_t r, int64_t c) const {
    return (*data_)[static_cast<size_t>(r * cols() + c)];
}

double Tensor::value() const {
    if (numel() != 1) {
        throw ShapeError("value() requires exactly one element, got shape " + shape_str(shape_));
    }
    return (*data_)[0];
}

}  // namespace relnet
