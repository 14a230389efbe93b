#pragma once

#include <string>
#include <vector>

#include "onda/common.hpp"
#include "onda/kernel.hpp"

namespace onda {

/// Solver settings for the direct huberized kernel SVM used by the
/// comparison methods.
struct SvmOptions {
  double lambda = 1.0;
  double delta = 1.0;
  double gamma = 0.0;    // <= 0 selects the median heuristic on training data
  int max_iters = 2000;
  double grad_tol = 1e-8;
};

/// Kernel SVM trained by gradient descent on the representer coefficients.
class SvmModel {
 public:
  SvmModel() = default;

  /// Train on (x, y); warm starts from `init_alpha`/`init_beta0` when the
  /// former matches the sample count.
  static SvmModel train(const Matrix& x, const Vector& y, const SvmOptions& opts,
                        const Vector& init_alpha = Vector(),
                        double init_beta0 = 0.0);

  double decision(const Vector& x) const;
  int predict(const Vector& x) const { return decision(x) < 0.0 ? -1 : 1; }

  const Vector& alpha() const { return alpha_; }
  double beta0() const { return beta0_; }
  double bandwidth() const { return cfg_.bandwidth; }

 private:
  Matrix train_x_;
  Vector train_y_;
  Vector alpha_;
  double beta0_ = 0.0;
  KernelConfig cfg_;
};

struct BenchmarkConfig {
  std::string method;     // svm_offline | svm_online | sa_offline | sa_online
  int subspace_dim = 10;  // alignment methods only
  SvmOptions svm;
};

/// Pooled z-normalization of source and target feature columns; columns with
/// (near-)zero variance are passed through unchanged.
std::pair<Matrix, Matrix> normalize_pooled(const Matrix& source,
                                           const Matrix& target);

/// All-target-known baseline: normalize pooled features, train on source,
/// predict every target row.
std::vector<int> svm_offline(const Matrix& source_x, const Vector& source_y,
                             const Matrix& target_x, const SvmOptions& opts);

/// Streaming baseline: train once on raw source features, predict each target
/// row as it arrives.
std::vector<int> svm_online(const Matrix& source_x, const Vector& source_y,
                            const Matrix& target_x, const SvmOptions& opts);

/// Centered principal subspaces of both domains aligned by M = Xs^T Xt;
/// `dim` reports the effective dimension after any rank reduction.
struct AlignedFeatures {
  Matrix source;
  Matrix target;
  int dim = 0;
};

AlignedFeatures subspace_align(const Matrix& source_x, const Matrix& target_x,
                               int d);

/// Offline subspace alignment followed by an SVM on the aligned source.
std::vector<int> sa_offline(const Matrix& source_x, const Vector& source_y,
                            const Matrix& target_x, int d,
                            const SvmOptions& opts);

/// Streaming subspace alignment: realign and retrain on every arrival using
/// the target rows seen so far; raw-feature SVM during the bootstrap phase
/// (fewer than d target points). The source subspace is computed once.
std::vector<int> sa_online(const Matrix& source_x, const Vector& source_y,
                           const Matrix& target_x, int d,
                           const SvmOptions& opts);

/// Strict majority over +-1 votes; an exact tie yields -1.
int majority_vote(const std::vector<int>& votes);

}  // namespace onda
