#include "onda/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace onda {

namespace {

inline double kernel_entry(const Eigen::Ref<const Vector>& a,
                           const Eigen::Ref<const Vector>& b, double gamma) {
  return std::exp(-(a - b).squaredNorm() / gamma);
}

void check_bandwidth(const KernelConfig& cfg) {
  if (!(cfg.bandwidth > 0.0)) {
    throw ParameterError("kernel: bandwidth must be positive");
  }
}

}  // namespace

double gaussian_kernel(const Vector& a, const Vector& b,
                       const KernelConfig& cfg) {
  check_bandwidth(cfg);
  if (a.size() != b.size()) {
    throw DataError("gaussian_kernel: dimension mismatch");
  }
  return kernel_entry(a, b, cfg.bandwidth);
}

Matrix kernel_matrix(const Matrix& x, const KernelConfig& cfg) {
  check_bandwidth(cfg);
  const int n = static_cast<int>(x.rows());
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v =
          kernel_entry(x.row(i).transpose(), x.row(j).transpose(), cfg.bandwidth);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelConfig& cfg) {
  check_bandwidth(cfg);
  if (a.cols() != b.cols()) {
    throw DataError("cross_kernel: feature dimensions differ");
  }
  Matrix k(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j)
      k(i, j) =
          kernel_entry(a.row(i).transpose(), b.row(j).transpose(), cfg.bandwidth);
  return k;
}

double median_bandwidth(const Matrix& x) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) return 1.0;
  // Deterministic stride subsample above 1000 rows.
  std::vector<int> idx;
  const int stride = n > 1000 ? (n + 999) / 1000 : 1;
  for (int i = 0; i < n; i += stride) idx.push_back(i);

  std::vector<double> d2;
  d2.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      d2.push_back((x.row(idx[i]) - x.row(idx[j])).squaredNorm());
  auto mid = d2.begin() + d2.size() / 2;
  std::nth_element(d2.begin(), mid, d2.end());
  return *mid > 0.0 ? *mid : 1.0;
}

LowRankFactor factorize_kernel(const Matrix& kernel, int r) {
  const int n = static_cast<int>(kernel.rows());
  if (kernel.cols() != n) throw DataError("factorize_kernel: matrix not square");
  if (r < 1 || r > n) {
    throw ParameterError("factorize_kernel: rank out of range [1, N]");
  }
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw DataError("factorize_kernel: matrix not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(kernel);
  if (solver.info() != Eigen::Success) {
    throw DataError("factorize_kernel: eigensolver failed");
  }
  const Vector& evals = solver.eigenvalues();  // ascending
  const double lmax = std::max(evals(n - 1), 0.0);
  if (evals(0) < -1e-8 * std::max(1.0, lmax)) {
    throw DataError("factorize_kernel: matrix not PSD within tolerance");
  }

  LowRankFactor factor;
  factor.v.resize(n, r);
  for (int j = 0; j < r; ++j) {
    const int src = n - 1 - j;  // descending eigenvalue order
    factor.v.col(j) =
        solver.eigenvectors().col(src) * std::sqrt(std::max(evals(src), 0.0));
  }
  return factor;
}

double factorization_error(const Matrix& kernel, const LowRankFactor& factor) {
  const double denom = kernel.norm();
  if (!(denom > 0.0)) throw DataError("factorization_error: zero kernel");
  return (factor.v * factor.v.transpose() - kernel).norm() / denom;
}

Matrix MmdCoeff::matrix() const {
  const Vector w = signed_weights();
  return w * w.transpose();
}

Vector MmdCoeff::signed_weights() const {
  if (n_source < 1 || n_target < 1) {
    throw ParameterError("MmdCoeff: both sample sets must be nonempty");
  }
  Vector w(n_source + n_target);
  w.head(n_source).setConstant(1.0 / n_source);
  w.tail(n_target).setConstant(-1.0 / n_target);
  return w;
}

double mmd_squared(const Matrix& kernel, const MmdCoeff& coeff) {
  const int n = coeff.n_source + coeff.n_target;
  if (kernel.rows() != n || kernel.cols() != n) {
    throw DataError("mmd_squared: kernel size does not match coefficients");
  }
  const Vector w = coeff.signed_weights();
  return w.dot(kernel * w);  // tr(K w w^T)
}

JointKernel::JointKernel(Matrix source_features, Matrix target_features,
                         KernelConfig cfg)
    : source_(std::move(source_features)),
      target_(std::move(target_features)),
      cfg_(cfg) {
  check_bandwidth(cfg_);
  if (source_.rows() < 1) throw DataError("JointKernel: empty source");
  if (target_.rows() > 0 && target_.cols() != source_.cols()) {
    throw DataError("JointKernel: feature dimensions differ");
  }
  if (target_.rows() == 0) target_.resize(0, source_.cols());
  Matrix stacked(total(), source_.cols());
  stacked.topRows(n_source()) = source_;
  stacked.bottomRows(n_target()) = target_;
  k_ = kernel_matrix(stacked, cfg_);
}

Vector JointKernel::column_for(const Vector& x) const {
  if (x.size() != source_.cols()) {
    throw DataError("JointKernel: point dimension mismatch");
  }
  Vector col(total());
  for (int i = 0; i < n_source(); ++i)
    col(i) = kernel_entry(source_.row(i).transpose(), x, cfg_.bandwidth);
  for (int i = 0; i < n_target(); ++i)
    col(n_source() + i) =
        kernel_entry(target_.row(i).transpose(), x, cfg_.bandwidth);
  return col;
}

void JointKernel::append_target(const Matrix& rows) {
  if (rows.rows() < 1) throw ParameterError("append_target: empty batch");
  if (rows.cols() != source_.cols()) {
    throw DataError("append_target: feature dimension mismatch");
  }
  const int old_n = total();
  const int add = static_cast<int>(rows.rows());

  Matrix grown(old_n + add, old_n + add);
  grown.topLeftCorner(old_n, old_n) = k_;
  for (int j = 0; j < add; ++j) {
    const Vector col = column_for(rows.row(j).transpose());
    grown.col(old_n + j).head(old_n) = col;
    grown.row(old_n + j).head(old_n) = col.transpose();
  }
  for (int i = 0; i < add; ++i) {
    grown(old_n + i, old_n + i) = 1.0;
    for (int j = i + 1; j < add; ++j) {
      const double v = kernel_entry(rows.row(i).transpose(),
                                    rows.row(j).transpose(), cfg_.bandwidth);
      grown(old_n + i, old_n + j) = v;
      grown(old_n + j, old_n + i) = v;
    }
  }

  target_.conservativeResize(target_.rows() + add, Eigen::NoChange);
  target_.bottomRows(add) = rows;
  k_ = std::move(grown);
}

}  // namespace onda
