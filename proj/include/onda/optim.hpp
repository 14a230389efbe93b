#pragma once

#include <Eigen/Cholesky>

#include "onda/common.hpp"
#include "onda/kernel.hpp"

namespace onda {

/// Huberized hinge: 0 above the margin, quadratic on (1-delta, 1], linear
/// below; continuously differentiable with smoothing width delta.
double psi(double a, double delta);
double psi_prime(double a, double delta);

struct Hyperparams {
  double lambda = 1.0;   // classifier ridge weight
  double lambda1 = 0.0;  // MMD alignment weight
  double lambda2 = 0.0;  // temporal smoothness weight
  int r = 50;            // source-kernel factor rank
  int m = 10;            // mapping-matrix column count
  double l1 = 1000.0;    // proximal step constant, classifier block
  double l2 = 1000.0;    // proximal step constant, mapping block
  double w1 = 0.01;      // extrapolation weight, classifier block
  double w2 = 0.01;      // extrapolation weight, mapping block
  int iters = 50;        // iteration cap per refresh
  double tol = 1e-6;     // relative objective-change stopping threshold
  double delta = 1.0;    // huberized hinge smoothing width
  double gamma = 0.0;    // kernel bandwidth; <= 0 selects the median heuristic

  void validate() const;
};

/// All time-indexed optimizer state for one source/target pair. Fields are
/// plain data; mutate through make_state/advance_time/fit_epoch, which keep
/// the cached source-kernel solver consistent.
struct DaState {
  Hyperparams hp;            // hp.r is clamped to the source count on creation
  Vector source_labels;      // +-1 per source sample
  JointKernel kernel;        // Gaussian kernel over [source; target]
  LowRankFactor factor;      // V with V V^T ~ K_SS
  Matrix w;                  // mapping matrix, (n_s + n_t) x m
  Matrix w_time_prev;        // previous refresh's mapping, zero-padded to match w
  Vector u;                  // (beta0; eta), length r + 1
  long time_index = 0;

  Eigen::LDLT<Matrix> kss_solver;  // K_SS, ridged when ill-conditioned
  bool kss_ridged = false;

  int n_source() const { return kernel.n_source(); }
  int n_target() const { return kernel.n_target(); }
  int total() const { return kernel.total(); }
};

/// Fresh state at time 0: median bandwidth, source kernel and its rank-r
/// factor, W started as the first m identity columns scaled by 1/sqrt(m),
/// u at zero.
DaState make_state(const Matrix& source_features, const Vector& source_labels,
                   const Hyperparams& hp);

/// Recompute the cached source-kernel solver (with the ridge fallback for
/// ill-conditioned kernels). Called by make_state and the checkpoint loader.
void rebuild_source_solver(DaState& state);

/// Append a batch of target rows: extends the joint kernel, promotes the
/// current W to the smoothness anchor, zero-pads both with the new rows, and
/// increments the time index.
void advance_time(DaState& state, const Matrix& new_target_features);

/// Classifier coefficients in the original kernel parameterization,
/// alpha = (K_SS Z_S)^{-1} V eta.
Vector recover_alpha(const DaState& state, const Vector& u);

struct ObjectiveTerms {
  double loss = 0.0;    // huberized source loss through the adapted kernel
  double ridge = 0.0;   // classifier norm penalty
  double mmd = 0.0;     // squared MMD of the adapted kernel embedding
  double smooth = 0.0;  // source-row drift from the previous refresh

  double total() const { return loss + ridge + mmd + smooth; }
};

ObjectiveTerms objective_terms(const DaState& state, const Matrix& w,
                               const Vector& u);
double objective(const DaState& state, const Matrix& w, const Vector& u);
double objective(const DaState& state);

/// Classifier-block smooth part f(u): huberized source loss through the
/// rank-r factored source kernel.
double classifier_loss(const DaState& state, const Vector& u);

/// Gradient of the classifier-block smooth part f at u.
Vector grad_f(const DaState& state, const Vector& u);

/// Closed-form proximal step for the classifier block at the extrapolated
/// point u_hat.
Vector u_update(const DaState& state, const Vector& u_hat);

struct WGradTerms {
  Matrix loss;
  Matrix ridge;
  Matrix mmd;

  Matrix total() const { return loss + ridge + mmd; }
};

/// The three smooth-part gradient terms of the mapping block at w.
WGradTerms w_grad_terms(const DaState& state, const Matrix& w, const Vector& u);

/// Closed-form proximal step for the mapping block at the extrapolated point
/// w_hat, with the classifier block fixed at u.
Matrix w_update(const DaState& state, const Matrix& w_hat, const Vector& u);

/// Alternate u and W proximal steps with extrapolation until the relative
/// objective change falls below hp.tol or hp.iters is reached. Returns the
/// number of iterations performed. Throws DivergedError on a non-finite
/// iterate.
int fit_epoch(DaState& state);

struct Prediction {
  int label = 1;       // -1 or +1; an exactly zero margin maps to +1
  double margin = 0.0;
};

/// Reusable per-refresh decision pieces: margins are wtq . (W^T k_x) + beta0.
struct DecisionCache {
  Vector wtq;
  double beta0 = 0.0;
};

DecisionCache make_decision_cache(const DaState& state);
Prediction predict_cached(const DaState& state, const DecisionCache& cache,
                          const Vector& x);
Prediction predict(const DaState& state, const Vector& x);

}  // namespace onda
