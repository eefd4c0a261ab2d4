#include "doctest.h"

#include <cmath>
#include <random>

#include "lgan/autodiff.hpp"

using namespace lgan;

namespace {

Matrix random_matrix(int r, int c, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(r, c);
    for (double& x : m.data) x = dist(rng);
    return m;
}

// Central finite differences of a scalar-valued builder with respect to one
// input matrix. The builder must rebuild the whole graph from the values.
template <typename Builder>
double max_rel_error(Matrix base, Builder build, double step = 1e-5) {
    Matrix analytic(base.rows, base.cols);
    {
        Tape tape;
        Tensor x = tape.input(base);
        Tensor loss = build(tape, x);
        tape.backward(loss);
        analytic = x.grad();
    }
    double worst = 0.0;
    for (size_t i = 0; i < base.data.size(); ++i) {
        Matrix plus = base, minus = base;
        plus.data[i] += step;
        minus.data[i] -= step;
        Tape tp, tm;
        double fp = build(tp, tp.input(plus)).value().data[0];
        double fm = build(tm, tm.input(minus)).value().data[0];
        double numeric = (fp - fm) / (2 * step);
        double denom = std::max({std::fabs(numeric), std::fabs(analytic.data[i]), 1e-8});
        worst = std::max(worst, std::fabs(numeric - analytic.data[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("forward values") {
    Tape tape;
    SUBCASE("matmul by identity") {
        Matrix eye(2, 2, {1, 0, 0, 1});
        Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
        Tensor out = tape.matmul(tape.input(eye), tape.input(a));
        CHECK(out.value().data == a.data);
    }
    SUBCASE("segment sum collapses grouped rows") {
        Matrix rows(2, 2, {1, 2, 3, 4});
        Tensor out = tape.segment_sum(tape.input(rows), {0, 0}, 1);
        CHECK(out.value().data == std::vector<double>{4, 6});
    }
    SUBCASE("empty segments give zero rows") {
        Matrix rows(1, 2, {5, 7});
        Tensor out = tape.segment_sum(tape.input(rows), {2}, 3);
        CHECK(out.value().data == std::vector<double>{0, 0, 0, 0, 5, 7});
    }
    SUBCASE("segment sum over zero rows") {
        Tensor out = tape.segment_sum(tape.input(Matrix(0, 2)), {}, 2);
        CHECK(out.value().data == std::vector<double>{0, 0, 0, 0});
    }
    SUBCASE("shape errors name both shapes") {
        CHECK_THROWS_WITH_AS(tape.matmul(tape.input(Matrix(2, 3)), tape.input(Matrix(2, 3))),
                             doctest::Contains("(2,3)"), std::invalid_argument);
    }
}

TEST_CASE("backward basics") {
    SUBCASE("sum gradient is all ones") {
        Tape tape;
        Tensor x = tape.input(Matrix(2, 2, {1, 2, 3, 4}));
        tape.backward(tape.sum_all(x));
        CHECK(x.grad().data == std::vector<double>{1, 1, 1, 1});
    }
    SUBCASE("relu masks the gradient") {
        Tape tape;
        Tensor x = tape.input(Matrix(1, 2, {-1, 2}));
        tape.backward(tape.sum_all(tape.relu(x)));
        CHECK(x.grad().data == std::vector<double>{0, 1});
    }
    SUBCASE("cross entropy at uniform logits: 0.5 minus one-hot") {
        Tape tape;
        Tensor logits = tape.input(Matrix(1, 2, {0.3, 0.3}));
        Tensor loss = tape.softmax_cross_entropy(logits, {0});
        tape.backward(loss);
        CHECK(logits.grad().data[0] == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(logits.grad().data[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("non-scalar loss rejected") {
        Tape tape;
        Tensor x = tape.input(Matrix(2, 2));
        CHECK_THROWS(tape.backward(x));
    }
    SUBCASE("unreachable tensors keep zero grad") {
        Tape tape;
        Tensor x = tape.input(Matrix(1, 1, {2.0}));
        Tensor y = tape.input(Matrix(1, 1, {3.0}));
        tape.backward(tape.sum_all(tape.scalar_mul(x, 2.0)));
        CHECK(y.grad().data[0] == 0.0);
        CHECK(x.grad().data[0] == 2.0);
    }
}

TEST_CASE("finite-difference checks for every op") {
    std::mt19937 rng(7);
    const double tol = 1e-4;

    SUBCASE("matmul, both arguments") {
        Matrix b0 = random_matrix(4, 3, rng);
        CHECK(max_rel_error(random_matrix(5, 4, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.matmul(x, t.input(b0))));
              }) < tol);
        Matrix a0 = random_matrix(5, 4, rng);
        CHECK(max_rel_error(random_matrix(4, 3, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.matmul(t.input(a0), x)));
              }) < tol);
    }
    SUBCASE("add and add_rowvec") {
        Matrix other = random_matrix(3, 3, rng);
        CHECK(max_rel_error(random_matrix(3, 3, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.add(x, t.input(other))));
              }) < tol);
        Matrix base = random_matrix(4, 3, rng);
        CHECK(max_rel_error(random_matrix(1, 3, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.add_rowvec(t.input(base), x)));
              }) < tol);
    }
    SUBCASE("concat, row_select, segment_sum, row_scale, scalar_mul") {
        Matrix other = random_matrix(3, 2, rng);
        CHECK(max_rel_error(random_matrix(3, 2, rng), [&](Tape& t, Tensor x) {
                  Tensor cat = t.concat_cols({x, t.input(other)});
                  Tensor sel = t.row_select(cat, {2, 0, 0, 1});
                  Tensor seg = t.segment_sum(sel, {1, 0, 1, 1}, 2);
                  return t.sum_all(t.relu(seg));
              }) < tol);
        Matrix rows = random_matrix(4, 3, rng);
        CHECK(max_rel_error(random_matrix(4, 1, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.row_scale(t.input(rows), x)));
              }) < tol);
        CHECK(max_rel_error(random_matrix(2, 3, rng), [&](Tape& t, Tensor x) {
                  return t.sum_all(t.relu(t.scalar_mul(x, -1.7)));
              }) < tol);
    }
    SUBCASE("softmax cross entropy") {
        CHECK(max_rel_error(random_matrix(4, 3, rng), [&](Tape& t, Tensor x) {
                  return t.softmax_cross_entropy(x, {0, 2, 1, 2});
              }) < tol);
    }
    SUBCASE("three-layer MLP end to end") {
        Matrix w1 = random_matrix(4, 6, rng), b1 = random_matrix(1, 6, rng);
        Matrix w2 = random_matrix(6, 5, rng), b2 = random_matrix(1, 5, rng);
        Matrix w3 = random_matrix(5, 2, rng);
        CHECK(max_rel_error(random_matrix(3, 4, rng), [&](Tape& t, Tensor x) {
                  Tensor h1 = t.relu(t.add_rowvec(t.matmul(x, t.input(w1)), t.input(b1)));
                  Tensor h2 = t.relu(t.add_rowvec(t.matmul(h1, t.input(w2)), t.input(b2)));
                  return t.softmax_cross_entropy(t.matmul(h2, t.input(w3)), {0, 1, 0});
              }) < tol);
    }
}

TEST_CASE("segment_sum invariant within segments") {
    // Permuting rows within a segment leaves the sum unchanged (exactly, for
    // permutation-symmetric inputs with identical addends; within floating
    // tolerance otherwise).
    Tape tape;
    Matrix rows(4, 2, {1.5, 2.5, -0.5, 1.0, 3.0, 0.25, 2.0, 2.0});
    Tensor a = tape.segment_sum(tape.input(rows), {0, 1, 0, 1}, 2);
    Matrix swapped(4, 2, {3.0, 0.25, 2.0, 2.0, 1.5, 2.5, -0.5, 1.0});
    Tensor b = tape.segment_sum(tape.input(swapped), {0, 1, 0, 1}, 2);
    for (size_t i = 0; i < a.value().data.size(); ++i)
        CHECK(a.value().data[i] == doctest::Approx(b.value().data[i]).epsilon(1e-12));
}

TEST_CASE("fresh tapes do not accumulate across runs") {
    Matrix base(1, 2, {1.0, -2.0});
    double g1, g2;
    {
        Tape tape;
        Tensor x = tape.input(base);
        tape.backward(tape.sum_all(tape.relu(x)));
        g1 = x.grad().data[0];
    }
    {
        Tape tape;
        Tensor x = tape.input(base);
        tape.backward(tape.sum_all(tape.relu(x)));
        g2 = x.grad().data[0];
    }
    CHECK(g1 == g2);
}

TEST_CASE("adam") {
    ParamSet ps;
    ps.params.push_back({"w", Matrix(1, 2, {1.0, 2.0})});
    AdamState state;
    AdamConfig cfg;
    cfg.lr = 0.1;

    SUBCASE("zero gradient leaves parameters in place") {
        adam_step(ps, {Matrix(1, 2)}, state, cfg);
        CHECK(ps.at("w").data == std::vector<double>{1.0, 2.0});
        CHECK(state.step == 1);
    }
    SUBCASE("first step moves by ~lr in the gradient direction") {
        // With zero state, one step gives -lr * g/(|g| + eps') elementwise.
        adam_step(ps, {Matrix(1, 2, {0.5, -0.25})}, state, cfg);
        CHECK(ps.at("w").data[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
        CHECK(ps.at("w").data[1] == doctest::Approx(2.0 + 0.1).epsilon(1e-6));
    }
    SUBCASE("two steps match a hand-rolled recurrence") {
        Matrix g(1, 2, {0.5, -0.25});
        adam_step(ps, {g}, state, cfg);
        adam_step(ps, {g}, state, cfg);

        double expect[2] = {1.0, 2.0};
        double m[2] = {0, 0}, v[2] = {0, 0};
        for (int step = 1; step <= 2; ++step) {
            for (int i = 0; i < 2; ++i) {
                m[i] = 0.9 * m[i] + 0.1 * g.data[i];
                v[i] = 0.999 * v[i] + 0.001 * g.data[i] * g.data[i];
                double mh = m[i] / (1 - std::pow(0.9, step));
                double vh = v[i] / (1 - std::pow(0.999, step));
                expect[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
            }
        }
        CHECK(ps.at("w").data[0] == doctest::Approx(expect[0]).epsilon(1e-12));
        CHECK(ps.at("w").data[1] == doctest::Approx(expect[1]).epsilon(1e-12));
    }
    SUBCASE("non-finite gradient names the parameter") {
        CHECK_THROWS_WITH_AS(adam_step(ps, {Matrix(1, 2, {std::nan(""), 0.0})}, state, cfg),
                             doctest::Contains("w"), std::runtime_error);
    }
}
