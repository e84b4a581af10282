#include "relnet/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relnet/errors.hpp"

namespace relnet {

namespace {

void ensure_finite(const std::vector<double>& values, const char* op_name) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value produced by ") + op_name);
        }
    }
}

void require(bool cond, const char* op_name, const std::string& detail) {
    if (!cond) {
        throw ShapeError(std::string(op_name) + ": " + detail);
    }
}

size_t sz(int64_t v) { return static_cast<size_t>(v); }

}  // namespace

Tensor Tape::push(Op op, Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                  const char* op_name, int axis, double scalar, std::vector<int64_t> indices,
                  Parameter* param) {
    ensure_finite(values, op_name);
    Node node;
    node.op = op;
    node.inputs = std::move(inputs);
    node.shape = shape;
    node.value = std::make_shared<const std::vector<double>>(std::move(values));
    node.axis = axis;
    node.scalar = scalar;
    node.indices = std::move(indices);
    node.param = param;
    nodes_.push_back(std::move(node));

    Tensor out;
    out.data_ = nodes_.back().value;
    out.shape_ = std::move(shape);
    out.node_ = static_cast<int>(nodes_.size()) - 1;
    return out;
}

Tensor Tape::leaf(Parameter& param) {
    std::vector<double> values = param.value;
    return push(Op::kLeaf, param.shape, std::move(values), {}, "leaf", kAllAxes, 0.0, {}, &param);
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul",
            "needs rank-2 operands, got " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
    require(a.cols() == b.rows(), "matmul",
            "inner dimensions differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    const int64_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(sz(m * n), 0.0);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t p = 0; p < k; ++p) {
            const double aip = av[sz(i * k + p)];
            if (aip == 0.0) continue;
            const double* brow = bv.data() + p * n;
            double* orow = out.data() + i * n;
            for (int64_t j = 0; j < n; ++j) {
                orow[j] += aip * brow[j];
            }
        }
    }
    return push(Op::kMatmul, {m, n}, std::move(out), {a, b}, "matmul");
}

Tensor Tape::transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose", "needs a rank-2 operand, got " + shape_str(a.shape()));
    const int64_t r = a.rows(), c = a.cols();
    std::vector<double> out(sz(r * c));
    for (int64_t i = 0; i < r; ++i) {
        for (int64_t j = 0; j < c; ++j) {
            out[sz(j * r + i)] = a.at(i, j);
        }
    }
    return push(Op::kTranspose, {c, r}, std::move(out), {a}, "transpose");
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "add",
            "shapes differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    std::vector<double> out(a.data());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] += b.at(static_cast<int64_t>(i));
    }
    return push(Op::kAdd, a.shape(), std::move(out), {a, b}, "add");
}

Tensor Tape::add_rowvec(const Tensor& mat, const Tensor& vec) {
    require(mat.rank() == 2, "add_rowvec", "matrix operand must be rank 2");
    require(vec.rank() == 1 && vec.numel() == mat.cols(), "add_rowvec",
            "vector shape " + shape_str(vec.shape()) + " does not match matrix columns " +
                std::to_string(mat.cols()));
    const int64_t r = mat.rows(), c = mat.cols();
    std::vector<double> out(mat.data());
    for (int64_t i = 0; i < r; ++i) {
        for (int64_t j = 0; j < c; ++j) {
            out[sz(i * c + j)] += vec.at(j);
        }
    }
    return push(Op::kAddRowVec, mat.shape(), std::move(out), {mat, vec}, "add_rowvec");
}

Tensor Tape::add_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.data());
    for (double& v : out) v += c;
    return push(Op::kAddScalar, a.shape(), std::move(out), {a}, "add_scalar");
}

Tensor Tape::scale(const Tensor& a, double s) {
    std::vector<double> out(a.data());
    for (double& v : out) v *= s;
    return push(Op::kScale, a.shape(), std::move(out), {a}, "scale", kAllAxes, s);
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "mul",
            "shapes differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    std::vector<double> out(a.data());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] *= b.at(static_cast<int64_t>(i));
    }
    return push(Op::kMul, a.shape(), std::move(out), {a, b}, "mul");
}

Tensor Tape::mul_scalar(const Tensor& a, const Tensor& s) {
    require(s.numel() == 1, "mul_scalar",
            "scale operand must hold one element, got " + shape_str(s.shape()));
    const double sv = s.at(0);
    std::vector<double> out(a.data());
    for (double& v : out) v *= sv;
    return push(Op::kMulScalar, a.shape(), std::move(out), {a, s}, "mul_scalar");
}

Tensor Tape::scale_rows(const Tensor& mat, const Tensor& vec) {
    require(mat.rank() == 2, "scale_rows", "matrix operand must be rank 2");
    require(vec.rank() == 1 && vec.numel() == mat.rows(), "scale_rows",
            "vector shape " + shape_str(vec.shape()) + " does not match matrix rows " +
                std::to_string(mat.rows()));
    const int64_t r = mat.rows(), c = mat.cols();
    std::vector<double> out(mat.data());
    for (int64_t i = 0; i < r; ++i) {
        const double f = vec.at(i);
        for (int64_t j = 0; j < c; ++j) {
            out[sz(i * c + j)] *= f;
        }
    }
    return push(Op::kScaleRows, mat.shape(), std::move(out), {mat, vec}, "scale_rows");
}

Tensor Tape::tanh(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) v = std::tanh(v);
    return push(Op::kTanh, a.shape(), std::move(out), {a}, "tanh");
}

Tensor Tape::relu(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) {
        relu_pattern_.push_back(v > 0.0 ? 1 : 0);
        if (v < 0.0) v = 0.0;
    }
    return push(Op::kRelu, a.shape(), std::move(out), {a}, "relu");
}

Tensor Tape::exp(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) v = std::exp(v);
    return push(Op::kExp, a.shape(), std::move(out), {a}, "exp");
}

Tensor Tape::log(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) v = std::log(v);
    return push(Op::kLog, a.shape(), std::move(out), {a}, "log");
}

Tensor Tape::sqrt(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) v = std::sqrt(v);
    return push(Op::kSqrt, a.shape(), std::move(out), {a}, "sqrt");
}

Tensor Tape::recip(const Tensor& a) {
    std::vector<double> out(a.data());
    for (double& v : out) v = 1.0 / v;
    return push(Op::kRecip, a.shape(), std::move(out), {a}, "recip");
}

namespace {

// Stable softmax of `n` strided values.
void softmax_slice(const double* in, double* out, int64_t n, int64_t stride) {
    double mx = in[0];
    for (int64_t i = 1; i < n; ++i) mx = std::max(mx, in[i * stride]);
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double e = std::exp(in[i * stride] - mx);
        out[i * stride] = e;
        total += e;
    }
    for (int64_t i = 0; i < n; ++i) out[i * stride] /= total;
}

}  // namespace

Tensor Tape::softmax(const Tensor& a, int axis) {
    require(a.rank() == 1 || a.rank() == 2, "softmax",
            "needs rank 1 or 2, got " + shape_str(a.shape()));
    require(a.numel() > 0, "softmax", "empty input");
    std::vector<double> out(a.data());
    if (a.rank() == 1) {
        require(axis == 0, "softmax", "rank-1 input admits axis 0 only");
        softmax_slice(a.data().data(), out.data(), a.numel(), 1);
    } else {
        const int64_t r = a.rows(), c = a.cols();
        if (axis == 1) {
            for (int64_t i = 0; i < r; ++i) {
                softmax_slice(a.data().data() + i * c, out.data() + i * c, c, 1);
            }
        } else if (axis == 0) {
            for (int64_t j = 0; j < c; ++j) {
                softmax_slice(a.data().data() + j, out.data() + j, r, c);
            }
        } else {
            require(false, "softmax", "axis must be 0 or 1 for rank-2 input");
        }
    }
    return push(Op::kSoftmax, a.shape(), std::move(out), {a}, "softmax", axis);
}

Tensor Tape::sum(const Tensor& a, int axis) {
    if (axis == kAllAxes) {
        double total = 0.0;
        for (double v : a.data()) total += v;
        return push(Op::kSum, Shape{}, {total}, {a}, "sum", axis);
    }
    require(a.rank() == 2, "sum", "axis reduction needs a rank-2 operand");
    require(axis == 0 || axis == 1, "sum", "axis must be 0 or 1");
    const int64_t r = a.rows(), c = a.cols();
    if (axis == 0) {
        std::vector<double> out(sz(c), 0.0);
        for (int64_t i = 0; i < r; ++i) {
            for (int64_t j = 0; j < c; ++j) out[sz(j)] += a.at(i, j);
        }
        return push(Op::kSum, {c}, std::move(out), {a}, "sum", axis);
    }
    std::vector<double> out(sz(r), 0.0);
    for (int64_t i = 0; i < r; ++i) {
        for (int64_t j = 0; j < c; ++j) out[sz(i)] += a.at(i, j);
    }
    return push(Op::kSum, {r}, std::move(out), {a}, "sum", axis);
}

Tensor Tape::mean(const Tensor& a, int axis) {
    require(a.numel() > 0, "mean", "empty input");
    if (axis == kAllAxes) {
        double total = 0.0;
        for (double v : a.data()) total += v;
        return push(Op::kMean, Shape{}, {total / static_cast<double>(a.numel())}, {a}, "mean",
                    axis);
    }
    require(a.rank() == 2, "mean", "axis reduction needs a rank-2 operand");
    require(axis == 0 || axis == 1, "mean", "axis must be 0 or 1");
    const int64_t r = a.rows(), c = a.cols();
    const int64_t n = axis == 0 ? r : c;
    if (axis == 0) {
        std::vector<double> out(sz(c), 0.0);
        for (int64_t i = 0; i < r; ++i) {
            for (int64_t j = 0; j < c; ++j) out[sz(j)] += a.at(i, j);
        }
        for (double& v : out) v /= static_cast<double>(n);
        return push(Op::kMean, {c}, std::move(out), {a}, "mean", axis);
    }
    std::vector<double> out(sz(r), 0.0);
    for (int64_t i = 0; i < r; ++i) {
        for (int64_t j = 0; j < c; ++j) out[sz(i)] += a.at(i, j);
    }
    for (double& v : out) v /= static_cast<double>(n);
    return push(Op::kMean, {r}, std::move(out), {a}, "mean", axis);
}

Tensor Tape::concat(std::span<const Tensor> parts, int axis) {
    require(!parts.empty(), "concat", "needs at least one part");
    const int rank = parts[0].rank();
    require(rank == 1 || rank == 2, "concat", "supports rank 1 or 2");
    require(axis == 0 || (axis == 1 && rank == 2), "concat", "bad axis for operand rank");
    std::vector<Tensor> inputs(parts.begin(), parts.end());

    if (rank == 1 || axis == 0) {
        int64_t total_rows = 0;
        const int64_t c = rank == 2 ? parts[0].cols() : 0;
        for (const auto& p : parts) {
            require(p.rank() == rank, "concat", "mixed ranks");
            if (rank == 2) {
                require(p.cols() == c, "concat", "column counts differ");
                total_rows += p.rows();
            } else {
                total_rows += p.numel();
            }
        }
        std::vector<double> out;
        out.reserve(sz(total_rows * std::max<int64_t>(c, 1)));
        for (const auto& p : parts) {
            out.insert(out.end(), p.data().begin(), p.data().end());
        }
        Shape shape = rank == 2 ? Shape{total_rows, c} : Shape{total_rows};
        return push(Op::kConcat, std::move(shape), std::move(out), std::move(inputs), "concat",
                    axis);
    }

    // axis == 1, rank 2: stitch rows side by side
    const int64_t r = parts[0].rows();
    int64_t total_cols = 0;
    for (const auto& p : parts) {
        require(p.rank() == 2 && p.rows() == r, "concat", "row counts differ");
        total_cols += p.cols();
    }
    std::vector<double> out(sz(r * total_cols));
    int64_t col_base = 0;
    for (const auto& p : parts) {
        const int64_t c = p.cols();
        for (int64_t i = 0; i < r; ++i) {
            for (int64_t j = 0; j < c; ++j) {
                out[sz(i * total_cols + col_base + j)] = p.at(i, j);
            }
        }
        col_base += c;
    }
    return push(Op::kConcat, {r, total_cols}, std::move(out), std::move(inputs), "concat", axis);
}

Tensor Tape::reshape(const Tensor& a, Shape shape) {
    require(shape_numel(shape) == a.numel(), "reshape",
            "element count changes from " + shape_str(a.shape()) + " to " + shape_str(shape));
    std::vector<double> out(a.data());
    return push(Op::kReshape, std::move(shape), std::move(out), {a}, "reshape");
}

Tensor Tape::gather(const Tensor& a, std::vector<int64_t> indices, Shape out_shape) {
    require(shape_numel(out_shape) == static_cast<int64_t>(indices.size()), "gather",
            "index count does not match output shape " + shape_str(out_shape));
    std::vector<double> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] >= 0 && indices[i] < a.numel(), "gather",
                "flat index " + std::to_string(indices[i]) + " outside tensor of " +
                    std::to_string(a.numel()) + " elements");
        out[i] = a.at(indices[i]);
    }
    return push(Op::kGather, std::move(out_shape), std::move(out), {a}, "gather", kAllAxes, 0.0,
                std::move(indices));
}

Tensor Tape::row(const Tensor& a, int64_t r) {
    const int64_t c = a.cols();
    std::vector<int64_t> idx(sz(c));
    for (int64_t j = 0; j < c; ++j) idx[sz(j)] = r * c + j;
    return gather(a, std::move(idx), {c});
}

Tensor Tape::rows(const Tensor& a, std::span<const int64_t> row_indices) {
    const int64_t c = a.cols();
    std::vector<int64_t> idx;
    idx.reserve(row_indices.size() * sz(c));
    for (int64_t r : row_indices) {
        for (int64_t j = 0; j < c; ++j) idx.push_back(r * c + j);
    }
    return gather(a, std::move(idx), {static_cast<int64_t>(row_indices.size()), c});
}

Tensor Tape::submatrix(const Tensor& a, std::span<const int64_t> row_indices,
                       std::span<const int64_t> col_indices) {
    const int64_t c = a.cols();
    std::vector<int64_t> idx;
    idx.reserve(row_indices.size() * col_indices.size());
    for (int64_t r : row_indices) {
        for (int64_t j : col_indices) idx.push_back(r * c + j);
    }
    return gather(a, std::move(idx),
                  {static_cast<int64_t>(row_indices.size()),
                   static_cast<int64_t>(col_indices.size())});
}

Tensor Tape::log1p_sum_exp(const Tensor& values) {
    // logsumexp over {0} union values; exact log(1 + sum exp(v)) without
    // overflow for large v.
    double mx = 0.0;
    for (double v : values.data()) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite input to log1p_sum_exp");
        }
        mx = std::max(mx, v);
    }
    double total = std::exp(-mx);
    for (double v : values.data()) total += std::exp(v - mx);
    const double out = mx + std::log(total);
    return push(Op::kLog1pSumExp, Shape{}, {out}, {values}, "log1p_sum_exp");
}

std::vector<double>& Tape::grad_buffer(const Tensor& input,
                                       std::vector<std::vector<double>>& grads) {
    auto& buf = grads[static_cast<size_t>(input.node())];
    if (buf.empty() && input.numel() > 0) {
        buf.assign(static_cast<size_t>(input.numel()), 0.0);
    }
    return buf;
}

void Tape::backward(const Tensor& loss) {
    if (loss.node() < 0 || static_cast<size_t>(loss.node()) >= nodes_.size()) {
        throw ContractError("backward: loss tensor was not produced by this tape");
    }
    if (loss.numel() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " +
                            shape_str(loss.shape()));
    }

    std::vector<std::vector<double>> grads(nodes_.size());
    grads[static_cast<size_t>(loss.node())].assign(1, 1.0);

    for (int i = loss.node(); i >= 0; --i) {
        const Node& node = nodes_[static_cast<size_t>(i)];
        const auto& out_grad = grads[static_cast<size_t>(i)];
        if (out_grad.empty()) continue;
        if (node.op == Op::kLeaf) {
            auto& g = node.param->grad;
            for (size_t k = 0; k < g.size(); ++k) g[k] += out_grad[k];
        } else {
            backward_node(node, out_grad, grads);
        }
        grads[static_cast<size_t>(i)].clear();
    }
}

void Tape::backward_node(const Node& node, const std::vector<double>& g,
                         std::vector<std::vector<double>>& grads) {
    auto tracked = [](const Tensor& t) { return t.node() >= 0; };

    switch (node.op) {
        case Op::kLeaf:
            break;
        case Op::kMatmul: {
            const Tensor& a = node.inputs[0];
            const Tensor& b = node.inputs[1];
            const int64_t m = a.rows(), k = a.cols(), n = b.cols();
            if (tracked(a)) {
                auto& da = grad_buffer(a, grads);
                // dA = G * B^T
                for (int64_t i = 0; i < m; ++i) {
                    for (int64_t j = 0; j < n; ++j) {
                        const double gij = g[sz(i * n + j)];
                        if (gij == 0.0) continue;
                        for (int64_t p = 0; p < k; ++p) {
                            da[sz(i * k + p)] += gij * b.at(p, j);
                        }
                    }
                }
            }
            if (tracked(b)) {
                auto& db = grad_buffer(b, grads);
                // dB = A^T * G
                for (int64_t i = 0; i < m; ++i) {
                    for (int64_t p = 0; p < k; ++p) {
                        const double aip = a.at(i, p);
                        if (aip == 0.0) continue;
                        for (int64_t j = 0; j < n; ++j) {
                            db[sz(p * n + j)] += aip * g[sz(i * n + j)];
                        }
                    }
                }
            }
            break;
        }
        case Op::kTranspose: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const int64_t r = a.rows(), c = a.cols();
            for (int64_t i = 0; i < r; ++i) {
                for (int64_t j = 0; j < c; ++j) {
                    da[sz(i * c + j)] += g[sz(j * r + i)];
                }
            }
            break;
        }
        case Op::kAdd: {
            for (const Tensor& t : node.inputs) {
                if (!tracked(t)) continue;
                auto& dt = grad_buffer(t, grads);
                for (size_t i = 0; i < g.size(); ++i) dt[i] += g[i];
            }
            break;
        }
        case Op::kAddRowVec: {
            const Tensor& mat = node.inputs[0];
            const Tensor& vec = node.inputs[1];
            const int64_t r = mat.rows(), c = mat.cols();
            if (tracked(mat)) {
                auto& dm = grad_buffer(mat, grads);
                for (size_t i = 0; i < g.size(); ++i) dm[i] += g[i];
            }
            if (tracked(vec)) {
                auto& dv = grad_buffer(vec, grads);
                for (int64_t i = 0; i < r; ++i) {
                    for (int64_t j = 0; j < c; ++j) dv[sz(j)] += g[sz(i * c + j)];
                }
            }
            break;
        }
        case Op::kAddScalar:
        case Op::kReshape: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
            break;
        }
        case Op::kScale: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            for (size_t i = 0; i < g.size(); ++i) da[i] += node.scalar * g[i];
            break;
        }
        case Op::kMul: {
            const Tensor& a = node.inputs[0];
            const Tensor& b = node.inputs[1];
            if (tracked(a)) {
                auto& da = grad_buffer(a, grads);
                for (size_t i = 0; i < g.size(); ++i) {
                    da[i] += g[i] * b.at(static_cast<int64_t>(i));
                }
            }
            if (tracked(b)) {
                auto& db = grad_buffer(b, grads);
                for (size_t i = 0; i < g.size(); ++i) {
                    db[i] += g[i] * a.at(static_cast<int64_t>(i));
                }
            }
            break;
        }
        case Op::kMulScalar: {
            const Tensor& a = node.inputs[0];
            const Tensor& s = node.inputs[1];
            const double sv = s.at(0);
            if (tracked(a)) {
                auto& da = grad_buffer(a, grads);
                for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * sv;
            }
            if (tracked(s)) {
                auto& ds = grad_buffer(s, grads);
                double acc = 0.0;
                for (size_t i = 0; i < g.size(); ++i) {
                    acc += g[i] * a.at(static_cast<int64_t>(i));
                }
                ds[0] += acc;
            }
            break;
        }
        case Op::kScaleRows: {
            const Tensor& mat = node.inputs[0];
            const Tensor& vec = node.inputs[1];
            const int64_t r = mat.rows(), c = mat.cols();
            if (tracked(mat)) {
                auto& dm = grad_buffer(mat, grads);
                for (int64_t i = 0; i < r; ++i) {
                    const double f = vec.at(i);
                    for (int64_t j = 0; j < c; ++j) dm[sz(i * c + j)] += g[sz(i * c + j)] * f;
                }
            }
            if (tracked(vec)) {
                auto& dv = grad_buffer(vec, grads);
                for (int64_t i = 0; i < r; ++i) {
                    double acc = 0.0;
                    for (int64_t j = 0; j < c; ++j) acc += g[sz(i * c + j)] * mat.at(i, j);
                    dv[sz(i)] += acc;
                }
            }
            break;
        }
        case Op::kTanh: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const auto& y = *node.value;
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
        }
        case Op::kRelu: {
            // Subgradient 0 at input exactly 0.
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            for (size_t i = 0; i < g.size(); ++i) {
                if (a.at(static_cast<int64_t>(i)) > 0.0) da[i] += g[i];
            }
            break;
        }
        case Op::kExp: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const auto& y = *node.value;
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * y[i];
            break;
        }
        case Op::kLog: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            for (size_t i = 0; i < g.size(); ++i) {
                da[i] += g[i] / a.at(static_cast<int64_t>(i));
            }
            break;
        }
        case Op::kSqrt: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const auto& y = *node.value;
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * 0.5 / y[i];
            break;
        }
        case Op::kRecip: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const auto& y = *node.value;
            for (size_t i = 0; i < g.size(); ++i) da[i] -= g[i] * y[i] * y[i];
            break;
        }
        case Op::kSoftmax: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const auto& y = *node.value;
            auto slice_backward = [&](int64_t base, int64_t n, int64_t stride) {
                double dot = 0.0;
                for (int64_t i = 0; i < n; ++i) {
                    dot += g[sz(base + i * stride)] * y[sz(base + i * stride)];
                }
                for (int64_t i = 0; i < n; ++i) {
                    const size_t k = sz(base + i * stride);
                    da[k] += y[k] * (g[k] - dot);
                }
            };
            if (a.rank() == 1) {
                slice_backward(0, a.numel(), 1);
            } else if (node.axis == 1) {
                for (int64_t i = 0; i < a.rows(); ++i) {
                    slice_backward(i * a.cols(), a.cols(), 1);
                }
            } else {
                for (int64_t j = 0; j < a.cols(); ++j) {
                    slice_backward(j, a.rows(), a.cols());
                }
            }
            break;
        }
        case Op::kSum:
        case Op::kMean: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            const bool is_mean = node.op == Op::kMean;
            if (node.axis == kAllAxes) {
                const double f = is_mean ? 1.0 / static_cast<double>(a.numel()) : 1.0;
                for (size_t i = 0; i < da.size(); ++i) da[i] += g[0] * f;
            } else {
                const int64_t r = a.rows(), c = a.cols();
                const double f =
                    is_mean ? 1.0 / static_cast<double>(node.axis == 0 ? r : c) : 1.0;
                for (int64_t i = 0; i < r; ++i) {
                    for (int64_t j = 0; j < c; ++j) {
                        da[sz(i * c + j)] += g[sz(node.axis == 0 ? j : i)] * f;
                    }
                }
            }
            break;
        }
        case Op::kConcat: {
            if (node.axis == 0 || node.inputs[0].rank() == 1) {
                size_t offset = 0;
                for (const Tensor& t : node.inputs) {
                    const size_t n = static_cast<size_t>(t.numel());
                    if (tracked(t)) {
                        auto& dt = grad_buffer(t, grads);
                        for (size_t i = 0; i < n; ++i) dt[i] += g[offset + i];
                    }
                    offset += n;
                }
            } else {
                const int64_t r = node.inputs[0].rows();
                const int64_t total_cols = node.shape[1];
                int64_t col_base = 0;
                for (const Tensor& t : node.inputs) {
                    const int64_t c = t.cols();
                    if (tracked(t)) {
                        auto& dt = grad_buffer(t, grads);
                        for (int64_t i = 0; i < r; ++i) {
                            for (int64_t j = 0; j < c; ++j) {
                                dt[sz(i * c + j)] += g[sz(i * total_cols + col_base + j)];
                            }
                        }
                    }
                    col_base += c;
                }
            }
            break;
        }
        case Op::kGather: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            for (size_t i = 0; i < node.indices.size(); ++i) {
                da[sz(node.indices[i])] += g[i];
            }
            break;
        }
        case Op::kLog1pSumExp: {
            const Tensor& a = node.inputs[0];
            if (!tracked(a)) break;
            auto& da = grad_buffer(a, grads);
            double mx = 0.0;
            for (double v : a.data()) mx = std::max(mx, v);
            double total = std::exp(-mx);
            for (double v : a.data()) total += std::exp(v - mx);
            for (size_t i = 0; i < da.size(); ++i) {
                da[i] += g[0] * std::exp(a.at(static_cast<int64_t>(i)) - mx) / total;
            }
            break;
        }
    }
}

}  // namespace relnet
