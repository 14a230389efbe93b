#pragma once

#include "onda/common.hpp"

namespace onda {

/// Gaussian kernel scale: k(a, b) = exp(-||a - b||^2 / bandwidth).
struct KernelConfig {
  double bandwidth = 1.0;
};

double gaussian_kernel(const Vector& a, const Vector& b,
                       const KernelConfig& cfg);

/// Kernel matrix over the rows of x.
Matrix kernel_matrix(const Matrix& x, const KernelConfig& cfg);

/// Rectangular kernel block between the rows of a and the rows of b.
Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelConfig& cfg);

/// Median of pairwise squared distances among the rows of x ("median
/// heuristic"). Falls back to 1.0 when all rows coincide. Rows are subsampled
/// deterministically above 1000 samples.
double median_bandwidth(const Matrix& x);

/// Rank-r factor V with V V^T ~ K, from the top-r eigenpairs.
struct LowRankFactor {
  Matrix v;

  int rank() const { return static_cast<int>(v.cols()); }
};

LowRankFactor factorize_kernel(const Matrix& kernel, int r);

/// Relative Frobenius error ||V V^T - K||_F / ||K||_F.
double factorization_error(const Matrix& kernel, const LowRankFactor& factor);

/// Block-constant MMD coefficient matrix over stacked source+target samples:
/// 1/Ns^2 on source-source, -1/(Ns Nt) across, 1/Nt^2 on target-target.
/// Equals w w^T for the signed weight vector w = [1/Ns ...; -1/Nt ...].
struct MmdCoeff {
  int n_source = 0;
  int n_target = 0;

  Matrix matrix() const;
  Vector signed_weights() const;
};

/// tr(K S): the squared empirical MMD when K is a kernel matrix over the
/// stacked samples that S indexes.
double mmd_squared(const Matrix& kernel, const MmdCoeff& coeff);

/// Gaussian kernel matrix over stacked source+target features, growable on
/// the target side.
class JointKernel {
 public:
  JointKernel() = default;
  JointKernel(Matrix source_features, Matrix target_features, KernelConfig cfg);

  int n_source() const { return static_cast<int>(source_.rows()); }
  int n_target() const { return static_cast<int>(target_.rows()); }
  int total() const { return n_source() + n_target(); }
  int feature_dim() const { return static_cast<int>(source_.cols()); }

  const Matrix& matrix() const { return k_; }
  const Matrix& source_features() const { return source_; }
  const Matrix& target_features() const { return target_; }
  const KernelConfig& config() const { return cfg_; }

  /// Kernel column of a new point against all stacked samples.
  Vector column_for(const Vector& x) const;

  /// Extend the target block with new feature rows.
  void append_target(const Matrix& rows);

 private:
  Matrix source_;
  Matrix target_;
  Matrix k_;
  KernelConfig cfg_;
};

}  // namespace onda
