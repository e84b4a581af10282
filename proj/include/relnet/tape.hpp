#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relnet/param.hpp"
#include "relnet/tensor.hpp"

namespace relnet {

/// Axis value meaning "reduce over every element".
inline constexpr int kAllAxes = -1;

// Define-by-run recording tape. Every operation appends one node holding the
// result value plus handles to its inputs; backward() replays the record in
// reverse and accumulates gradients into the Parameters registered via
// leaf(). A tape and its tensors belong to one thread; build a fresh tape per
// episode.
//
// Every forward result is checked for NaN/Inf and a NumericError is raised at
// the offending primitive. Reductions run in a fixed left-to-right order so
// repeated runs are bitwise identical.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers a parameter as a differentiable leaf for this tape.
    Tensor leaf(Parameter& param);

    // --- primitives ---
    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor transpose(const Tensor& a);
    Tensor add(const Tensor& a, const Tensor& b);
    /// Adds a length-c vector to every row of an r x c matrix.
    Tensor add_rowvec(const Tensor& mat, const Tensor& vec);
    Tensor add_scalar(const Tensor& a, double c);
    Tensor scale(const Tensor& a, double s);
    Tensor mul(const Tensor& a, const Tensor& b);
    /// Multiplies every element of a by the single element of s.
    Tensor mul_scalar(const Tensor& a, const Tensor& s);
    /// Scales row i of mat by vec[i].
    Tensor scale_rows(const Tensor& mat, const Tensor& vec);
    Tensor tanh(const Tensor& a);
    Tensor relu(const Tensor& a);
    Tensor exp(const Tensor& a);
    Tensor log(const Tensor& a);
    Tensor sqrt(const Tensor& a);
    Tensor recip(const Tensor& a);
    /// Softmax along `axis`. Rank 1 uses axis 0; rank 2 admits axis 0
    /// (columns sum to one) or axis 1 (rows sum to one).
    Tensor softmax(const Tensor& a, int axis);
    Tensor sum(const Tensor& a, int axis = kAllAxes);
    Tensor mean(const Tensor& a, int axis = kAllAxes);
    Tensor concat(std::span<const Tensor> parts, int axis);
    Tensor reshape(const Tensor& a, Shape shape);
    /// Picks out_shape.numel() elements of a by flat index. Indices may
    /// repeat; gradients scatter-add back.
    Tensor gather(const Tensor& a, std::vector<int64_t> indices, Shape out_shape);

    // --- composites ---
    Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }
    /// Row `row` of a rank-2 tensor as a vector.
    Tensor row(const Tensor& a, int64_t row);
    /// Selected rows of a rank-2 tensor, in the order given.
    Tensor rows(const Tensor& a, std::span<const int64_t> row_indices);
    /// Submatrix a[row_indices x col_indices].
    Tensor submatrix(const Tensor& a, std::span<const int64_t> row_indices,
                     std::span<const int64_t> col_indices);

    /// log(1 + sum_i exp(values_i)), overflow-safe, 0 for an empty input.
    Tensor log1p_sum_exp(const Tensor& values);

    /// Accumulates d(loss)/d(param) into every registered Parameter.
    void backward(const Tensor& loss);

    size_t size() const { return nodes_.size(); }

    /// One byte per relu element seen so far: 1 where the input was > 0.
    /// Comparing patterns across perturbed evaluations detects kink crossings.
    const std::vector<uint8_t>& relu_pattern() const { return relu_pattern_; }

  private:
    enum class Op {
        kLeaf,
        kMatmul,
        kTranspose,
        kAdd,
        kAddRowVec,
        kAddScalar,
        kScale,
        kMul,
        kMulScalar,
        kScaleRows,
        kTanh,
        kRelu,
        kExp,
        kLog,
        kSqrt,
        kRecip,
        kSoftmax,
        kSum,
        kMean,
        kConcat,
        kReshape,
        kGather,
        kLog1pSumExp,
    };

    struct Node {
        Op op;
        std::vector<Tensor> inputs;
        Shape shape;
        std::shared_ptr<const std::vector<double>> value;
        int axis = kAllAxes;
        double scalar = 0.0;
        std::vector<int64_t> indices;
        Parameter* param = nullptr;
    };

    Tensor push(Op op, Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                const char* op_name, int axis = kAllAxes, double scalar = 0.0,
                std::vector<int64_t> indices = {}, Parameter* param = nullptr);
    void backward_node(const Node& node, const std::vector<double>& out_grad,
                       std::vector<std::vector<double>>& grads);
    std::vector<double>& grad_buffer(const Tensor& input,
                                     std::vector<std::vector<double>>& grads);

    std::vector<Node> nodes_;
    std::vector<uint8_t> relu_pattern_;
};

}  // namespace relnet
