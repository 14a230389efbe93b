#include <cmath>
#include <random>

#include "doctest.h"
#include "onda/optim.hpp"

using onda::DaState;
using onda::Hyperparams;
using onda::Matrix;
using onda::Vector;

namespace {

struct Instance {
  DaState state;
  Matrix w;
  Vector u;
};

// Random fitted-shape instance with both classes present.
Instance random_instance(std::mt19937_64& rng, int n_s, int n_t, int r, int m,
                         double lambda1, double lambda2) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 4;
  Matrix xs(n_s, d);
  for (int i = 0; i < xs.size(); ++i) xs.data()[i] = gauss(rng);
  Vector ys(n_s);
  for (int i = 0; i < n_s; ++i) ys(i) = i % 2 == 0 ? 1.0 : -1.0;

  Hyperparams hp;
  hp.r = r;
  hp.m = m;
  hp.lambda1 = lambda1;
  hp.lambda2 = lambda2;
  Instance inst{onda::make_state(xs, ys, hp), {}, {}};
  if (n_t > 0) {
    Matrix xt(n_t, d);
    for (int i = 0; i < xt.size(); ++i) xt.data()[i] = gauss(rng) + 0.5;
    onda::advance_time(inst.state, xt);
  }
  inst.w.resize(inst.state.total(), m);
  for (int i = 0; i < inst.w.size(); ++i) inst.w.data()[i] = 0.3 * gauss(rng);
  inst.u.resize(inst.state.hp.r + 1);
  for (int i = 0; i < inst.u.size(); ++i) inst.u(i) = 0.5 * gauss(rng);
  return inst;
}

}  // namespace

TEST_CASE("psi piecewise values and slopes") {
  CHECK(onda::psi(2.0, 1.0) == 0.0);
  CHECK(onda::psi_prime(2.0, 1.0) == 0.0);
  CHECK(onda::psi(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(onda::psi_prime(0.0, 1.0) == doctest::Approx(-1.0));
  CHECK(onda::psi(-1.0, 1.0) == doctest::Approx(1.5));
  CHECK(onda::psi_prime(-1.0, 1.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(onda::psi(0.0, 0.0), onda::ParameterError);
  CHECK_THROWS_AS(onda::psi_prime(0.0, -1.0), onda::ParameterError);
}

TEST_CASE("psi is C1 at both knots") {
  const double h = 1e-5;
  for (double delta : {1.0, 0.37}) {
    for (double knot : {1.0, 1.0 - delta}) {
      for (double step : {h, -h}) {
        const double lin = onda::psi(knot, delta) +
                           onda::psi_prime(knot, delta) * step;
        const double err = std::abs(onda::psi(knot + step, delta) - lin);
        CHECK(err <= h * h / delta);
      }
    }
  }
}

TEST_CASE("grad_f matches central differences of the classifier loss") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = random_instance(rng, 8, 0, 4, 3, 0.0, 0.0);
    const Vector g = onda::grad_f(inst.state, inst.u);
    const double h = 1e-6;
    for (int j = 0; j < inst.u.size(); ++j) {
      Vector up = inst.u, dn = inst.u;
      up(j) += h;
      dn(j) -= h;
      const double fd = (onda::classifier_loss(inst.state, up) -
                         onda::classifier_loss(inst.state, dn)) /
                        (2.0 * h);
      CHECK(g(j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("u_update fixed point and plain gradient step") {
  // Two identical points with opposite labels zero the gradient at u = 0.
  Matrix xs(2, 3);
  xs << 1, 2, 3, 1, 2, 3;
  Vector ys(2);
  ys << 1, -1;
  Hyperparams hp;
  hp.r = 2;
  hp.m = 2;
  DaState state = onda::make_state(xs, ys, hp);
  const Vector zero = Vector::Zero(state.hp.r + 1);
  CHECK(onda::grad_f(state, zero).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(onda::u_update(state, zero).cwiseAbs().maxCoeff() < 1e-14);

  // With the ridge off the update is a plain gradient step.
  std::mt19937_64 rng(7);
  auto inst = random_instance(rng, 6, 0, 3, 2, 0.0, 0.0);
  inst.state.hp.lambda = 0.0;
  const Vector expect =
      inst.u - onda::grad_f(inst.state, inst.u) / inst.state.hp.l1;
  CHECK((onda::u_update(inst.state, inst.u) - expect).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("u_update zeroes the local quadratic model gradient") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    auto inst = random_instance(rng, 10, 0, 5, 3, 0.0, 0.0);
    const DaState& s = inst.state;
    const Vector u_new = onda::u_update(s, inst.u);
    Vector residual = onda::grad_f(s, inst.u) + s.hp.l1 * (u_new - inst.u);
    residual.tail(s.hp.r) += s.hp.lambda * u_new.tail(s.hp.r);
    CHECK(residual.norm() < 1e-8);

    // A generic gradient-descent minimizer of the quadratic model lands on
    // the same point.
    Vector v = inst.u;
    const Vector g0 = onda::grad_f(s, inst.u);
    for (int it = 0; it < 4000; ++it) {
      Vector grad = g0 + s.hp.l1 * (v - inst.u);
      grad.tail(s.hp.r) += s.hp.lambda * v.tail(s.hp.r);
      v -= grad / (s.hp.l1 + s.hp.lambda + 1.0);
    }
    CHECK((v - u_new).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("mapping-block gradient terms match finite differences") {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = random_instance(rng, 8, 5, 4, 3, 0.8, 0.4);
    const DaState& s = inst.state;
    const auto grads = onda::w_grad_terms(s, inst.w, inst.u);
    const double h = 1e-5;

    Matrix fd_loss(inst.w.rows(), inst.w.cols());
    Matrix fd_ridge = fd_loss, fd_mmd = fd_loss;
    for (int i = 0; i < inst.w.rows(); ++i) {
      for (int j = 0; j < inst.w.cols(); ++j) {
        Matrix up = inst.w, dn = inst.w;
        up(i, j) += h;
        dn(i, j) -= h;
        const auto tu = onda::objective_terms(s, up, inst.u);
        const auto td = onda::objective_terms(s, dn, inst.u);
        fd_loss(i, j) = (tu.loss - td.loss) / (2.0 * h);
        fd_ridge(i, j) = (tu.ridge - td.ridge) / (2.0 * h);
        fd_mmd(i, j) = (tu.mmd - td.mmd) / (2.0 * h);
      }
    }
    const double scale = 1.0 + grads.total().norm();
    CHECK((grads.loss - fd_loss).norm() / scale < 1e-4);
    CHECK((grads.ridge - fd_ridge).norm() / scale < 1e-4);
    CHECK((grads.mmd - fd_mmd).norm() / scale < 1e-4);
    CHECK((grads.total() - (fd_loss + fd_ridge + fd_mmd)).norm() / scale < 1e-4);
  }
}

TEST_CASE("w_update fixed point with zero coefficients and weights off") {
  std::mt19937_64 rng(17);
  auto inst = random_instance(rng, 8, 4, 4, 3, 0.0, 0.0);
  const Vector u0 = Vector::Zero(inst.state.hp.r + 1);
  const Matrix w_new = onda::w_update(inst.state, inst.w, u0);
  CHECK((w_new - inst.w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("w_update satisfies first-order optimality of its model") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    auto inst = random_instance(rng, 8, 5, 4, 3, 0.7, 0.3);
    const DaState& s = inst.state;
    const Matrix w_new = onda::w_update(s, inst.w, inst.u);
    Matrix residual =
        onda::w_grad_terms(s, inst.w, inst.u).total() + s.hp.l2 * (w_new - inst.w);
    residual.topRows(s.n_source()) +=
        2.0 * s.hp.lambda2 *
        (w_new.topRows(s.n_source()) - s.w_time_prev.topRows(s.n_source()));
    CHECK(residual.norm() < 1e-8);
  }
}

TEST_CASE("large smoothness weight pins source rows to the previous map") {
  std::mt19937_64 rng(23);
  auto inst = random_instance(rng, 8, 5, 4, 3, 0.5, 0.0);
  double prev_dist = 1e300;
  for (double l2 : {0.1, 10.0, 1000.0, 1e5}) {
    inst.state.hp.lambda2 = l2;
    const Matrix w_new = onda::w_update(inst.state, inst.w, inst.u);
    const double dist = (w_new.topRows(8) - inst.state.w_time_prev.topRows(8)).norm();
    CHECK(dist < prev_dist);
    prev_dist = dist;
  }
}

TEST_CASE("objective matches an independent term-by-term evaluation") {
  std::mt19937_64 rng(301);
  auto inst = random_instance(rng, 7, 4, 3, 2, 1.3, 0.6);
  const DaState& s = inst.state;
  const auto terms = onda::objective_terms(s, inst.w, inst.u);

  // Straight re-implementation from the definitions.
  const Matrix& k = s.kernel.matrix();
  const Vector alpha = onda::recover_alpha(s, inst.u);
  Vector za = Vector::Zero(s.total());
  za.head(7) = s.source_labels.cwiseProduct(alpha);
  const Matrix emp = k * inst.w * inst.w.transpose() * k;  // adapted kernel
  double loss = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double dec = za.dot(emp.col(i)) + inst.u(0);
    loss += onda::psi(s.source_labels(i) * dec, s.hp.delta);
  }
  loss /= 7.0;
  const double ridge = 0.5 * s.hp.lambda * za.dot(emp * za);
  const onda::MmdCoeff coeff{7, 4};
  const double mmd = s.hp.lambda1 * (coeff.matrix() * emp).trace();
  const double smooth =
      s.hp.lambda2 *
      (inst.w.topRows(7) - s.w_time_prev.topRows(7)).squaredNorm();

  CHECK(terms.loss == doctest::Approx(loss).epsilon(1e-10));
  CHECK(terms.ridge == doctest::Approx(ridge).epsilon(1e-10));
  CHECK(terms.mmd == doctest::Approx(mmd).epsilon(1e-10));
  CHECK(terms.smooth == doctest::Approx(smooth).epsilon(1e-10));
}

TEST_CASE("objective trivial cases") {
  std::mt19937_64 rng(303);
  auto inst = random_instance(rng, 6, 3, 3, 2, 0.0, 0.0);
  DaState& s = inst.state;
  const Vector u0 = Vector::Zero(s.hp.r + 1);
  const Matrix w0 = Matrix::Zero(s.total(), s.hp.m);
  const auto terms = onda::objective_terms(s, w0, u0);
  CHECK(terms.loss == doctest::Approx(0.5));  // psi(0) with delta = 1
  CHECK(terms.total() == doctest::Approx(0.5));

  // W equal to the padded previous map zeroes the smoothness term.
  s.hp.lambda2 = 4.0;
  const auto same = onda::objective_terms(s, s.w_time_prev, inst.u);
  CHECK(same.smooth == 0.0);
}

TEST_CASE("fit_epoch honors the iteration cap and zero-iteration case") {
  std::mt19937_64 rng(41);
  auto inst = random_instance(rng, 10, 4, 4, 3, 0.5, 0.01);
  DaState& s = inst.state;

  s.hp.iters = 0;
  const Vector u_before = s.u;
  const Matrix w_before = s.w;
  CHECK(onda::fit_epoch(s) == 0);
  CHECK((s.u - u_before).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.w - w_before).cwiseAbs().maxCoeff() == 0.0);

  s.hp.iters = 7;
  s.hp.tol = 0.0;  // force the cap
  CHECK(onda::fit_epoch(s) == 7);
}

TEST_CASE("fit_epoch does not increase the objective endpoint") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = random_instance(rng, 12, 6, 5, 3, 0.5, 0.02);
    DaState& s = inst.state;
    const double before = onda::objective(s);
    s.hp.iters = 50;
    onda::fit_epoch(s);
    CHECK(onda::objective(s) <= before + 1e-12);
  }
}

TEST_CASE("fit_epoch reports divergence with the iteration index") {
  std::mt19937_64 rng(47);
  auto inst = random_instance(rng, 8, 4, 4, 3, 1e8, 0.0);
  DaState& s = inst.state;
  s.hp.l1 = 1e-280;  // absurd step constants blow the iterates up
  s.hp.l2 = 1e-280;
  s.hp.tol = 0.0;
  try {
    onda::fit_epoch(s);
    FAIL("expected divergence");
  } catch (const onda::DivergedError& e) {
    CHECK(e.iteration >= 1);
  }
}

TEST_CASE("advance_time bookkeeping") {
  std::mt19937_64 rng(53);
  auto inst = random_instance(rng, 9, 0, 4, 3, 0.5, 0.5);
  DaState& s = inst.state;
  CHECK(s.n_target() == 0);
  CHECK(s.time_index == 0);

  const Matrix w_fitted = s.w;
  Matrix batch = Matrix::Random(6, 4);
  onda::advance_time(s, batch);
  CHECK(s.n_target() == 6);
  CHECK(s.time_index == 1);
  CHECK(s.w.rows() == 15);
  CHECK((s.w_time_prev.topRows(9) - w_fitted.topRows(9)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(s.w_time_prev.bottomRows(6).cwiseAbs().maxCoeff() == 0.0);

  onda::advance_time(s, batch);
  CHECK(s.n_target() == 12);
  CHECK(s.time_index == 2);
  CHECK(s.w.rows() == 21);

  CHECK_THROWS_AS(onda::advance_time(s, Matrix::Random(2, 5)), onda::DataError);
  CHECK_THROWS_AS(onda::advance_time(s, Matrix(0, 4)), onda::ParameterError);
}

TEST_CASE("predict tie resolves to +1 and rank padding is a no-op") {
  std::mt19937_64 rng(59);
  auto inst = random_instance(rng, 8, 3, 4, 3, 0.5, 0.1);
  DaState& s = inst.state;

  // u = 0 makes every margin exactly zero.
  const auto tie = onda::predict(s, Vector::Zero(4));
  CHECK(tie.margin == 0.0);
  CHECK(tie.label == 1);

  onda::fit_epoch(s);
  const Vector probe = Vector::Constant(4, 0.3);
  const auto before = onda::predict(s, probe);

  // Append an all-zero factor column and a matching zero coefficient.
  Matrix v2(s.factor.v.rows(), s.factor.v.cols() + 1);
  v2 << s.factor.v, Vector::Zero(s.factor.v.rows());
  s.factor.v = v2;
  Vector u2(s.u.size() + 1);
  u2 << s.u, 0.0;
  s.u = u2;
  s.hp.r += 1;
  const auto after = onda::predict(s, probe);
  CHECK(after.margin == doctest::Approx(before.margin).epsilon(1e-12));
  CHECK(after.label == before.label);
}

TEST_CASE("predictions with a cache match one-shot predictions") {
  std::mt19937_64 rng(61);
  auto inst = random_instance(rng, 10, 5, 5, 3, 0.5, 0.1);
  DaState& s = inst.state;
  onda::fit_epoch(s);
  const auto cache = onda::make_decision_cache(s);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x(i) = gauss(rng);
    const auto a = onda::predict(s, x);
    const auto b = onda::predict_cached(s, cache, x);
    CHECK(a.margin == b.margin);
    CHECK(a.label == b.label);
  }
}
