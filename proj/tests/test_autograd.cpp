#include <doctest.h>

#include <cmath>
#include <functional>

#include "intel/autograd.hpp"
#include "intel/rng.hpp"

using namespace intel;
using namespace intel::ad;

namespace {

Mat random_mat(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

// Checks d(f)/d(inputs) against central finite differences for a scalar-valued
// graph builder applied to leaf matrices.
void fd_check(std::function<Var(Tape&, const std::vector<Var>&)> build,
              std::vector<Mat> inputs, double h = 1e-6, double tol = 1e-5) {
  Tape tape;
  std::vector<Var> leaves;
  for (auto& m : inputs) leaves.push_back(tape.leaf(m, true));
  Var out = build(tape, leaves);
  REQUIRE(tape.value(out).size() == 1);
  tape.backward(out);

  for (size_t which = 0; which < inputs.size(); ++which) {
    Mat analytic = tape.grad(leaves[which]);
    REQUIRE(analytic.size() == inputs[which].size());
    for (int r = 0; r < inputs[which].rows(); ++r) {
      for (int c = 0; c < inputs[which].cols(); ++c) {
        auto eval = [&](double v) {
          Tape t2;
          std::vector<Var> l2;
          for (size_t i = 0; i < inputs.size(); ++i) {
            Mat m = inputs[i];
            if (i == which) m(r, c) = v;
            l2.push_back(t2.leaf(m, false));
          }
          return t2.value(build(t2, l2))(0, 0);
        };
        double x = inputs[which](r, c);
        double fd = (eval(x + h) - eval(x - h)) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(analytic(r, c)), 1.0});
        CHECK(std::abs(fd - analytic(r, c)) / denom <= tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("autograd: elementwise and matmul ops match finite differences") {
  Rng rng(42);
  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.emul(t.add(v[0], v[1]), t.sub(v[0], v[1])));
  }, {random_mat(rng, 3, 4), random_mat(rng, 3, 4)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.mean(t.matmul(v[0], v[1]));
  }, {random_mat(rng, 3, 4), random_mat(rng, 4, 2)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.matmul_nt(v[0], v[1]));
  }, {random_mat(rng, 3, 4), random_mat(rng, 2, 4)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.matmul_tn(v[0], v[1]));
  }, {random_mat(rng, 3, 4), random_mat(rng, 3, 2)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.ediv(v[0], t.add_scalar(t.square(v[1]), 1.0)));
  }, {random_mat(rng, 2, 3), random_mat(rng, 2, 3)});
}

TEST_CASE("autograd: activations match finite differences") {
  Rng rng(43);
  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.sigmoid(v[0]));
  }, {random_mat(rng, 3, 3, -2.0, 2.0)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.tanh(v[0]));
  }, {random_mat(rng, 3, 3, -2.0, 2.0)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.softplus(v[0]));
  }, {random_mat(rng, 3, 3, -3.0, 3.0)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.exp(t.scale(v[0], 0.5)));
  }, {random_mat(rng, 2, 2)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.log(t.add_scalar(t.square(v[0]), 0.5)));
  }, {random_mat(rng, 2, 3)});
}

TEST_CASE("autograd: softmax, gather, concat, broadcast, pairwise_diff") {
  Rng rng(44);
  fd_check([](Tape& t, const std::vector<Var>& v) {
    Var sm = t.softmax_rows(v[0]);
    return t.sum(t.emul(sm, v[1]));  // weighted by constant-ish second input
  }, {random_mat(rng, 3, 4, -2.0, 2.0), random_mat(rng, 3, 4)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    Var g = t.gather_rows(v[0], {2, 0, 2, 1});
    return t.mean(t.square(g));
  }, {random_mat(rng, 3, 3)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.square(t.concat_cols(v[0], v[1])));
  }, {random_mat(rng, 2, 3), random_mat(rng, 2, 2)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    Var b = t.broadcast_row(v[0], 4);
    return t.sum(t.emul(b, v[1]));
  }, {random_mat(rng, 1, 3), random_mat(rng, 4, 3)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    Var d = t.pairwise_diff(v[0]);
    return t.sum(t.exp(t.neg(t.square(d))));
  }, {random_mat(rng, 5, 1)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.square(t.transpose(v[0])));
  }, {random_mat(rng, 2, 4)});

  fd_check([](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.square(t.rowsum(v[0])));
  }, {random_mat(rng, 3, 4)});
}

TEST_CASE("autograd: linear layer and a small MLP") {
  Rng rng(45);
  fd_check([](Tape& t, const std::vector<Var>& v) {
    Var h = t.tanh(t.linear(v[0], v[1], v[2]));
    Var out = t.linear(h, v[3], v[4]);
    return t.mean(t.square(out));
  }, {random_mat(rng, 3, 4), random_mat(rng, 5, 4), random_mat(rng, 5, 1),
      random_mat(rng, 2, 5), random_mat(rng, 2, 1)});
}

TEST_CASE("autograd: value reuse in a diamond graph accumulates both paths") {
  Tape tape;
  Mat x(1, 1);
  x << 0.7;
  Var v = tape.leaf(x, true);
  Var a = tape.square(v);       // x^2
  Var b = tape.scale(v, 3.0);   // 3x
  Var out = tape.sum(tape.add(a, b));
  tape.backward(out);
  CHECK(tape.grad(v)(0, 0) == doctest::Approx(2.0 * 0.7 + 3.0));
}

TEST_CASE("param store adam updates and xavier init are deterministic") {
  ParamStore p1, p2;
  Rng r1(7), r2(7);
  p1.add("w", 4, 3);
  p2.add("w", 4, 3);
  p1.init_xavier("w", r1);
  p2.init_xavier("w", r2);
  CHECK(p1.get("w") == p2.get("w"));

  Mat g = Mat::Ones(4, 3);
  p1.accumulate_grad("w", g);
  p2.accumulate_grad("w", g);
  p1.adam_step(0.01, 1.0);
  p2.adam_step(0.01, 1.0);
  CHECK(p1.get("w") == p2.get("w"));

  // lr=0 leaves parameters unchanged.
  ParamStore p3;
  p3.add("w", 2, 2);
  Mat before = p3.get("w");
  p3.accumulate_grad("w", Mat::Ones(2, 2));
  p3.adam_step(0.0, 1.0);
  CHECK(p3.get("w") == before);
}

TEST_CASE("graph context reuses leaves and collects grads") {
  ParamStore store;
  store.add("w", 2, 2) << 1.0, 2.0, 3.0, 4.0;
  Tape tape;
  GraphContext ctx(tape, store, true);
  Var w1 = ctx.param("w");
  Var w2 = ctx.param("w");
  CHECK(w1.id == w2.id);
  Var loss = ctx.tape().sum(ctx.tape().square(w1));
  tape.backward(loss);
  ctx.collect_grads();
  CHECK(store.grad("w")(1, 1) == doctest::Approx(8.0));
}
