#include "onda/optim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

namespace onda {

double psi(double a, double delta) {
  if (!(delta > 0.0)) throw ParameterError("psi: delta must be positive");
  if (a > 1.0) return 0.0;
  if (a > 1.0 - delta) {
    const double t = 1.0 - a;
    return t * t / (2.0 * delta);
  }
  return 1.0 - a - delta / 2.0;
}

double psi_prime(double a, double delta) {
  if (!(delta > 0.0)) throw ParameterError("psi_prime: delta must be positive");
  if (a > 1.0) return 0.0;
  if (a > 1.0 - delta) return -(1.0 - a) / delta;
  return -1.0;
}

void Hyperparams::validate() const {
  if (lambda < 0.0) throw ParameterError("hyperparams: lambda must be nonnegative");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw ParameterError("hyperparams: lambda1/lambda2 must be nonnegative");
  }
  if (r < 1) throw ParameterError("hyperparams: r must be at least 1");
  if (m < 1) throw ParameterError("hyperparams: m must be at least 1");
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    throw ParameterError("hyperparams: step constants must be positive");
  }
  if (w1 < 0.0 || w2 < 0.0) {
    throw ParameterError("hyperparams: extrapolation weights must be nonnegative");
  }
  if (iters < 0) throw ParameterError("hyperparams: iters must be nonnegative");
  if (tol < 0.0) throw ParameterError("hyperparams: tol must be nonnegative");
  if (!(delta > 0.0)) throw ParameterError("hyperparams: delta must be positive");
}

namespace {

// Design matrix of the classifier block: [Z_S 1, Z_S V].
Matrix xs_tilde(const DaState& s) {
  const int n = s.n_source();
  const int r = s.factor.rank();
  Matrix xs(n, r + 1);
  xs.col(0) = s.source_labels;
  xs.rightCols(r) = s.source_labels.asDiagonal() * s.factor.v;
  return xs;
}

// Pieces of the W-block evaluation that depend on u only.
struct UCtx {
  Vector q;  // K [Z_S alpha; 0]
  double beta0 = 0.0;
};

UCtx make_uctx(const DaState& s, const Vector& u) {
  const Vector alpha = recover_alpha(s, u);
  Vector za = Vector::Zero(s.total());
  za.head(s.n_source()) = s.source_labels.cwiseProduct(alpha);
  return {s.kernel.matrix() * za, u(0)};
}

// Source margins y_i (q^T W W^T k_i + beta0).
Vector source_margins(const DaState& s, const UCtx& ctx, const Matrix& w) {
  const Vector h = w * (w.transpose() * ctx.q);
  const Vector dec = (s.kernel.matrix() * h).head(s.n_source());
  return s.source_labels.cwiseProduct((dec.array() + ctx.beta0).matrix());
}

void check_w_shape(const DaState& s, const Matrix& w, const char* where) {
  if (w.rows() != s.total() || w.cols() != s.hp.m) {
    throw DataError(std::string(where) + ": mapping matrix shape mismatch");
  }
}

void check_u_shape(const DaState& s, const Vector& u, const char* where) {
  if (u.size() != s.factor.rank() + 1) {
    throw DataError(std::string(where) + ": coefficient vector length mismatch");
  }
}

}  // namespace

DaState make_state(const Matrix& source_features, const Vector& source_labels,
                   const Hyperparams& hp) {
  hp.validate();
  const int n = static_cast<int>(source_features.rows());
  if (n < 2) throw DataError("make_state: need at least 2 source samples");
  if (source_labels.size() != n) {
    throw DataError("make_state: label count does not match sample count");
  }
  if (!source_features.allFinite()) {
    throw DataError("make_state: non-finite source features");
  }
  for (int i = 0; i < n; ++i) {
    if (source_labels(i) != 1.0 && source_labels(i) != -1.0) {
      throw DataError("make_state: labels must be +1 or -1");
    }
  }
  if (hp.m > n) throw ParameterError("make_state: m exceeds source count");

  DaState s;
  s.hp = hp;
  s.hp.r = std::min(hp.r, n);
  s.source_labels = source_labels;

  const double gamma =
      hp.gamma > 0.0 ? hp.gamma : median_bandwidth(source_features);
  s.kernel = JointKernel(source_features, Matrix(0, source_features.cols()),
                         KernelConfig{gamma});

  s.factor = factorize_kernel(s.kernel.matrix(), s.hp.r);
  rebuild_source_solver(s);

  // Spectral start: with W = F_m Lambda_m^{-1/2} the adapted kernel
  // K W W^T K equals the best rank-m approximation of K, so the mapping
  // begins as a near-isometry of the RKHS instead of an arbitrary sketch.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s.kernel.matrix());
  s.w = Matrix::Zero(n, s.hp.m);
  for (int j = 0; j < s.hp.m; ++j) {
    const int src = n - 1 - j;
    const double lam = eig.eigenvalues()(src);
    if (lam > 1e-12) {
      s.w.col(j) = eig.eigenvectors().col(src) / std::sqrt(lam);
    }
  }
  s.w_time_prev = s.w;
  s.u = Vector::Zero(s.hp.r + 1);
  s.time_index = 0;
  return s;
}

void rebuild_source_solver(DaState& s) {
  const int n = s.n_source();
  const Matrix kss = s.kernel.matrix().topLeftCorner(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(kss, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(n - 1);
  s.kss_ridged = !(lmin > 0.0) || lmax / lmin > 1e12;
  Matrix solve_target = kss;
  if (s.kss_ridged) solve_target.diagonal().array() += 1e-8;
  s.kss_solver.compute(solve_target);
}

void advance_time(DaState& s, const Matrix& new_target_features) {
  if (new_target_features.rows() < 1) {
    throw ParameterError("advance_time: empty target batch");
  }
  if (new_target_features.cols() != s.kernel.feature_dim()) {
    throw DataError("advance_time: feature dimension mismatch");
  }
  if (!new_target_features.allFinite()) {
    throw DataError("advance_time: non-finite target features");
  }
  s.kernel.append_target(new_target_features);

  const int add = static_cast<int>(new_target_features.rows());
  Matrix padded = Matrix::Zero(s.w.rows() + add, s.w.cols());
  padded.topRows(s.w.rows()) = s.w;
  s.w_time_prev = padded;
  s.w = std::move(padded);
  ++s.time_index;
}

Vector recover_alpha(const DaState& s, const Vector& u) {
  check_u_shape(s, u, "recover_alpha");
  const Vector eta = u.tail(s.factor.rank());
  // (K_SS Z_S)^{-1} V eta = Z_S K_SS^{-1} V eta since Z_S is its own inverse.
  const Vector x = s.kss_solver.solve(s.factor.v * eta);
  return s.source_labels.cwiseProduct(x);
}

ObjectiveTerms objective_terms(const DaState& s, const Matrix& w,
                               const Vector& u) {
  check_w_shape(s, w, "objective");
  check_u_shape(s, u, "objective");
  const UCtx ctx = make_uctx(s, u);
  const Vector margins = source_margins(s, ctx, w);

  ObjectiveTerms terms;
  for (int i = 0; i < s.n_source(); ++i) {
    terms.loss += psi(margins(i), s.hp.delta);
  }
  terms.loss /= static_cast<double>(s.n_source());
  terms.ridge = 0.5 * s.hp.lambda * (w.transpose() * ctx.q).squaredNorm();
  if (s.n_target() > 0 && s.hp.lambda1 > 0.0) {
    const MmdCoeff coeff{s.n_source(), s.n_target()};
    const Vector b = s.kernel.matrix() * coeff.signed_weights();
    terms.mmd = s.hp.lambda1 * (w.transpose() * b).squaredNorm();
  }
  terms.smooth =
      s.hp.lambda2 *
      (w.topRows(s.n_source()) - s.w_time_prev.topRows(s.n_source()))
          .squaredNorm();
  return terms;
}

double objective(const DaState& s, const Matrix& w, const Vector& u) {
  return objective_terms(s, w, u).total();
}

double objective(const DaState& s) { return objective(s, s.w, s.u); }

double classifier_loss(const DaState& s, const Vector& u) {
  check_u_shape(s, u, "classifier_loss");
  const Vector margins = xs_tilde(s) * u;
  double loss = 0.0;
  for (int i = 0; i < margins.size(); ++i) {
    loss += psi(margins(i), s.hp.delta);
  }
  return loss / static_cast<double>(s.n_source());
}

Vector grad_f(const DaState& s, const Vector& u) {
  check_u_shape(s, u, "grad_f");
  const Matrix xs = xs_tilde(s);
  Vector slopes = xs * u;
  for (int i = 0; i < slopes.size(); ++i) {
    slopes(i) = psi_prime(slopes(i), s.hp.delta);
  }
  return xs.transpose() * slopes / static_cast<double>(s.n_source());
}

Vector u_update(const DaState& s, const Vector& u_hat) {
  check_u_shape(s, u_hat, "u_update");
  const Vector num = s.hp.l1 * u_hat - grad_f(s, u_hat);
  Vector u(num.size());
  u(0) = num(0) / s.hp.l1;  // the intercept carries no ridge
  u.tail(u.size() - 1) = num.tail(num.size() - 1) / (s.hp.l1 + s.hp.lambda);
  return u;
}

WGradTerms w_grad_terms(const DaState& s, const Matrix& w, const Vector& u) {
  check_w_shape(s, w, "w_grad_terms");
  check_u_shape(s, u, "w_grad_terms");
  const UCtx ctx = make_uctx(s, u);
  const Vector margins = source_margins(s, ctx, w);

  Vector c(s.n_source());
  for (int i = 0; i < s.n_source(); ++i) {
    c(i) = psi_prime(margins(i), s.hp.delta) * s.source_labels(i);
  }
  c /= static_cast<double>(s.n_source());
  const Vector p = s.kernel.matrix().leftCols(s.n_source()) * c;

  WGradTerms terms;
  terms.loss = p * (ctx.q.transpose() * w) + ctx.q * (p.transpose() * w);
  terms.ridge = s.hp.lambda * ctx.q * (ctx.q.transpose() * w);
  if (s.n_target() > 0 && s.hp.lambda1 > 0.0) {
    const MmdCoeff coeff{s.n_source(), s.n_target()};
    const Vector b = s.kernel.matrix() * coeff.signed_weights();
    terms.mmd = 2.0 * s.hp.lambda1 * b * (b.transpose() * w);
  } else {
    terms.mmd = Matrix::Zero(w.rows(), w.cols());
  }
  return terms;
}

Matrix w_update(const DaState& s, const Matrix& w_hat, const Vector& u) {
  check_w_shape(s, w_hat, "w_update");
  Matrix rhs = s.hp.l2 * w_hat - w_grad_terms(s, w_hat, u).total();
  rhs.topRows(s.n_source()) +=
      2.0 * s.hp.lambda2 * s.w_time_prev.topRows(s.n_source());

  // (L2 I + 2 lambda2 H^T H) is diagonal: source rows get the penalty, target
  // rows do not.
  Matrix w(rhs.rows(), rhs.cols());
  w.topRows(s.n_source()) = rhs.topRows(s.n_source()) / (s.hp.l2 + 2.0 * s.hp.lambda2);
  if (s.n_target() > 0) {
    w.bottomRows(s.n_target()) = rhs.bottomRows(s.n_target()) / s.hp.l2;
  }
  return w;
}

int fit_epoch(DaState& s) {
  s.hp.validate();
  if (s.hp.iters == 0) return 0;

  Vector u_km1 = s.u;
  Vector u_km2 = s.u;
  Matrix w_km1 = s.w;
  Matrix w_km2 = s.w;
  double prev = objective(s, w_km1, u_km1);

  int performed = 0;
  for (int k = 1; k <= s.hp.iters; ++k) {
    const Vector u_hat = u_km1 + s.hp.w1 * (u_km1 - u_km2);
    Vector u_k = u_update(s, u_hat);
    const Matrix w_hat = w_km1 + s.hp.w2 * (w_km1 - w_km2);
    Matrix w_k = w_update(s, w_hat, u_k);
    if (!u_k.allFinite() || !w_k.allFinite()) {
      throw DivergedError("fit_epoch: non-finite iterate", k);
    }
    u_km2 = std::move(u_km1);
    u_km1 = std::move(u_k);
    w_km2 = std::move(w_km1);
    w_km1 = std::move(w_k);
    performed = k;

    const double obj = objective(s, w_km1, u_km1);
    if (std::abs(obj - prev) <= s.hp.tol * std::max(1.0, std::abs(prev))) {
      break;
    }
    prev = obj;
  }
  s.u = std::move(u_km1);
  s.w = std::move(w_km1);
  return performed;
}

DecisionCache make_decision_cache(const DaState& s) {
  const UCtx ctx = make_uctx(s, s.u);
  return {s.w.transpose() * ctx.q, ctx.beta0};
}

Prediction predict_cached(const DaState& s, const DecisionCache& cache,
                          const Vector& x) {
  const Vector kx = s.kernel.column_for(x);
  const double margin = cache.wtq.dot(s.w.transpose() * kx) + cache.beta0;
  return {margin < 0.0 ? -1 : 1, margin};
}

Prediction predict(const DaState& s, const Vector& x) {
  return predict_cached(s, make_decision_cache(s), x);
}

}  // namespace onda
