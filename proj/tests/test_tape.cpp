#include <cmath>
#include <vector>

#include "doctest.h"
#include "relnet/errors.hpp"
#include "relnet/rng.hpp"
#include "relnet/tape.hpp"

using namespace relnet;

namespace {

Parameter make_param(const std::string& name, Shape shape, std::vector<double> values) {
    Parameter p;
    p.name = name;
    p.shape = std::move(shape);
    p.grad.assign(values.size(), 0.0);
    p.value = std::move(values);
    return p;
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
    Tape tape;
    Tensor out = tape.softmax(Tensor({2}, {0.0, 0.0}), 0);
    CHECK(out.at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.at(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax slices sum to one and stay in (0,1)") {
    Rng rng(7);
    Tape tape;
    std::vector<double> values(4 * 5);
    for (double& v : values) v = rng.uniform_real(-30.0, 30.0);
    Tensor mat({4, 5}, values);

    Tensor by_rows = tape.softmax(mat, 1);
    for (int64_t i = 0; i < 4; ++i) {
        double total = 0.0;
        for (int64_t j = 0; j < 5; ++j) {
            const double v = by_rows.at(i, j);
            CHECK(v > 0.0);
            CHECK(v < 1.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-6);
    }

    Tensor by_cols = tape.softmax(mat, 0);
    for (int64_t j = 0; j < 5; ++j) {
        double total = 0.0;
        for (int64_t i = 0; i < 4; ++i) total += by_cols.at(i, j);
        CHECK(std::abs(total - 1.0) < 1e-6);
    }
}

TEST_CASE("matmul by the identity is the identity map") {
    Tape tape;
    Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor x({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor out = tape.matmul(eye, x);
    for (int64_t i = 0; i < 6; ++i) {
        CHECK(out.at(i) == x.at(i));
    }
}

TEST_CASE("tanh and relu fixed points") {
    Tape tape;
    CHECK(tape.tanh(Tensor::scalar(0.0)).value() == 0.0);
    CHECK(tape.relu(Tensor::scalar(-2.0)).value() == 0.0);
}

TEST_CASE("shape mismatch names the primitive") {
    Tape tape;
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS_WITH_AS(tape.matmul(a, b), doctest::Contains("matmul"), ShapeError);
    CHECK_THROWS_WITH_AS(tape.add(a, b), doctest::Contains("add"), ShapeError);
}

TEST_CASE("non-finite forward output raises a numeric error") {
    Tape tape;
    CHECK_THROWS_AS(tape.exp(Tensor::scalar(1e6)), NumericError);
    CHECK_THROWS_AS(tape.log(Tensor::scalar(0.0)), NumericError);
    CHECK_THROWS_AS(tape.recip(Tensor::scalar(0.0)), NumericError);
}

TEST_CASE("log1p_sum_exp reference values") {
    Tape tape;
    CHECK(tape.log1p_sum_exp(Tensor::empty_vector()).value() == 0.0);
    CHECK(tape.log1p_sum_exp(Tensor({1}, {0.0})).value() ==
          doctest::Approx(0.6931471805599453).epsilon(1e-15));

    const double big = tape.log1p_sum_exp(Tensor({1}, {1000.0})).value();
    CHECK(big >= 1000.0);
    CHECK(big <= 1000.0 + 1e-6);
}

TEST_CASE("log1p_sum_exp stays above max(0, max(values))") {
    Rng rng(11);
    Tape tape;
    for (int trial = 0; trial < 50; ++trial) {
        const int64_t n = rng.uniform_below(6);
        std::vector<double> values(static_cast<size_t>(n));
        double mx = 0.0;
        for (double& v : values) {
            v = rng.uniform_real(-1e4, 1e4);
            mx = std::max(mx, v);
        }
        const double out = tape.log1p_sum_exp(Tensor({n}, values)).value();
        CHECK(out >= mx);
        CHECK(out >= 0.0);
    }
}

TEST_CASE("backward of x*x at x=3 is 6") {
    Parameter x = make_param("x", {}, {3.0});
    Tape tape;
    Tensor xv = tape.leaf(x);
    Tensor loss = tape.mul(xv, xv);
    tape.backward(loss);
    CHECK(x.grad[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward through sum-of-softmax is zero") {
    Parameter z = make_param("z", {3}, {0.3, -1.2, 2.0});
    Tape tape;
    Tensor loss = tape.sum(tape.softmax(tape.leaf(z), 0));
    tape.backward(loss);
    for (double g : z.grad) {
        CHECK(std::abs(g) < 1e-15);
    }
}

TEST_CASE("backward of log1p_sum_exp at 0 is one half") {
    Parameter e = make_param("e", {1}, {0.0});
    Tape tape;
    Tensor loss = tape.log1p_sum_exp(tape.leaf(e));
    tape.backward(loss);
    CHECK(e.grad[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("backward rejects non-scalar losses") {
    Parameter z = make_param("z", {2}, {1.0, 2.0});
    Tape tape;
    Tensor out = tape.scale(tape.leaf(z), 2.0);
    CHECK_THROWS_AS(tape.backward(out), ContractError);
}

TEST_CASE("gradients accumulate until reset") {
    Parameter x = make_param("x", {}, {3.0});
    Tape tape;
    Tensor xv = tape.leaf(x);
    Tensor loss = tape.mul(xv, xv);
    tape.backward(loss);
    tape.backward(loss);
    CHECK(x.grad[0] == doctest::Approx(12.0).epsilon(1e-12));
    x.zero_grad();
    CHECK(x.grad[0] == 0.0);
}

TEST_CASE("unreached parameters keep zero gradients") {
    Parameter used = make_param("used", {}, {2.0});
    Parameter unused = make_param("unused", {}, {5.0});
    Tape tape;
    Tensor uv = tape.leaf(used);
    tape.leaf(unused);
    tape.backward(tape.mul(uv, uv));
    CHECK(used.grad[0] == doctest::Approx(4.0));
    CHECK(unused.grad[0] == 0.0);
}

TEST_CASE("gather scatter-adds through repeated indices") {
    Parameter table = make_param("t", {3, 2}, {1, 2, 3, 4, 5, 6});
    Tape tape;
    Tensor emb = tape.leaf(table);
    // pick row 1 twice
    Tensor picked = tape.gather(emb, {2, 3, 2, 3}, {2, 2});
    tape.backward(tape.sum(picked));
    std::vector<double> expect = {0, 0, 2, 2, 0, 0};
    for (size_t i = 0; i < expect.size(); ++i) {
        CHECK(table.grad[i] == expect[i]);
    }
}

TEST_CASE("transpose and concat round values correctly") {
    Tape tape;
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor at = tape.transpose(a);
    CHECK(at.shape() == Shape{3, 2});
    CHECK(at.at(0, 1) == 4.0);
    CHECK(at.at(2, 0) == 3.0);

    Tensor b({1, 3}, {7, 8, 9});
    std::vector<Tensor> parts = {a, b};
    Tensor stacked = tape.concat(parts, 0);
    CHECK(stacked.shape() == Shape{3, 3});
    CHECK(stacked.at(2, 2) == 9.0);

    Tensor c({2, 1}, {10, 11});
    std::vector<Tensor> side = {a, c};
    Tensor wide = tape.concat(side, 1);
    CHECK(wide.shape() == Shape{2, 4});
    CHECK(wide.at(0, 3) == 10.0);
    CHECK(wide.at(1, 0) == 4.0);
}

TEST_CASE("sum and mean reductions by axis") {
    Tape tape;
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor col_sums = tape.sum(a, 0);
    CHECK(col_sums.shape() == Shape{3});
    CHECK(col_sums.at(0) == 5.0);
    Tensor row_means = tape.mean(a, 1);
    CHECK(row_means.shape() == Shape{2});
    CHECK(row_means.at(1) == 5.0);
    CHECK(tape.mean(a).value() == doctest::Approx(3.5));
}

// Random compositions of every primitive, checked against central
// differences. Exercises each op's backward rule in one pass.
TEST_CASE("random op compositions pass the finite-difference check") {
    Rng rng(1234);
    for (int trial = 0; trial < 8; ++trial) {
        ParameterStore store;
        Parameter& a = store.create("a", {3, 4});
        Parameter& b = store.create("b", {4, 3});
        Parameter& v = store.create("v", {4});
        Parameter& s = store.create("s", {3});
        for (Parameter* p : store.all()) {
            for (double& x : p->value) x = rng.normal(0.0, 1.0);
        }

        auto build = [&](Tape& t) {
            Tensor av = t.leaf(a);
            Tensor bv = t.leaf(b);
            Tensor prod = t.matmul(av, bv);                       // 3x3
            Tensor mixed = t.add(prod, t.transpose(prod));        // 3x3
            Tensor acts = t.tanh(t.scale(mixed, 0.5));            // 3x3
            Tensor biased = t.add_rowvec(t.matmul(acts, t.transpose(bv)), t.leaf(v));  // 3x4
            Tensor squashed = t.softmax(biased, 1);
            Tensor gathered = t.gather(squashed, {0, 5, 10, 3}, {4});
            Tensor pieces = t.log1p_sum_exp(gathered);
            Tensor scaled = t.scale_rows(t.relu(biased), t.leaf(s));
            Tensor more = t.add(t.mean(scaled), t.sum(t.mul(acts, acts)));
            Tensor logs = t.sum(t.log(t.add_scalar(t.exp(t.scale(acts, 0.3)), 1.0)));
            Tensor roots = t.sum(t.sqrt(t.add_scalar(t.mul(gathered, gathered), 0.1)));
            Tensor inv = t.sum(t.recip(t.add_scalar(t.mul(squashed, squashed), 1.0)));
            return t.add(t.add(pieces, more), t.add(logs, t.add(roots, inv)));
        };

        auto result = finite_diff_check(store, build, 1e-5);
        CHECK(result.max_rel_error <= 1e-3);
        CHECK(result.entries_checked > 0);
    }
}
