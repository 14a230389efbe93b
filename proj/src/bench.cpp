#include "onda/bench.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "onda/optim.hpp"

namespace onda {

namespace {

double spectral_norm_psd(const Matrix& k) {
  Vector v = Vector::Ones(k.rows());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 30; ++it) {
    Vector kv = k * v;
    lambda = kv.norm();
    if (lambda <= 0.0) return 0.0;
    v = kv / lambda;
  }
  return lambda;
}

// Internal PCA pieces shared by the alignment paths.
struct Pca {
  Eigen::RowVectorXd mean;
  Matrix basis;  // columns = principal directions, descending variance
};

Pca subspace_of(const Matrix& x, int d, bool centered);

// Centered principal directions, the offline convention.
Pca principal_subspace(const Matrix& x, int d) {
  return subspace_of(x, d, true);
}

// Raw second-moment directions for streaming use, where no target
// statistics may be consumed.
Pca raw_subspace(const Matrix& x, int d) { return subspace_of(x, d, false); }

Pca subspace_of(const Matrix& x, int d, bool centered) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) {
    throw ParameterError("subspace_align: need at least 2 samples per domain");
  }
  Pca pca;
  pca.mean = centered ? x.colwise().mean().eval()
                      : Eigen::RowVectorXd::Zero(x.cols()).eval();
  const Matrix shifted = x.rowwise() - pca.mean;
  const Matrix cov = shifted.transpose() * shifted / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& evals = eig.eigenvalues();  // ascending
  const int dim = static_cast<int>(evals.size());
  const double lmax = std::max(evals(dim - 1), 0.0);

  int rank = 0;
  for (int i = 0; i < dim; ++i) {
    if (evals(i) > std::max(1e-12 * lmax, 1e-15)) ++rank;
  }
  const int keep = std::min(d, rank);
  if (keep < 1) throw DataError("subspace_align: degenerate feature covariance");

  pca.basis.resize(dim, keep);
  for (int j = 0; j < keep; ++j) {
    Vector col = eig.eigenvectors().col(dim - 1 - j);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
    pca.basis.col(j) = col;
  }
  return pca;
}

}  // namespace

SvmModel SvmModel::train(const Matrix& x, const Vector& y,
                         const SvmOptions& opts, const Vector& init_alpha,
                         double init_beta0) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) throw DataError("SvmModel: need at least 2 training samples");
  if (y.size() != n) throw DataError("SvmModel: label count mismatch");
  if (!(opts.lambda > 0.0) || !(opts.delta > 0.0)) {
    throw ParameterError("SvmModel: lambda and delta must be positive");
  }

  SvmModel model;
  model.train_x_ = x;
  model.train_y_ = y;
  model.cfg_.bandwidth =
      opts.gamma > 0.0 ? opts.gamma : median_bandwidth(x);

  const Matrix k = kernel_matrix(x, model.cfg_);
  const Matrix zkz = y.asDiagonal() * k * y.asDiagonal();
  const double kmax = spectral_norm_psd(k);
  const double sqn = std::sqrt(static_cast<double>(n));
  const double lip = (kmax + sqn) * (kmax + sqn) / (n * opts.delta) +
                     opts.lambda * kmax;
  const double step = 1.0 / std::max(lip, 1e-12);

  Vector alpha = init_alpha.size() == n ? init_alpha : Vector::Zero(n);
  double beta0 = init_alpha.size() == n ? init_beta0 : 0.0;

  for (int it = 0; it < opts.max_iters; ++it) {
    const Vector margins = zkz * alpha + y * beta0;
    Vector slopes(n);
    for (int i = 0; i < n; ++i) {
      slopes(i) = psi_prime(margins(i), opts.delta);
    }
    const Vector galpha =
        zkz * (slopes / static_cast<double>(n) + opts.lambda * alpha);
    const double gbeta = y.dot(slopes) / static_cast<double>(n);
    const double gmax =
        std::max(galpha.cwiseAbs().maxCoeff(), std::abs(gbeta));
    if (gmax < opts.grad_tol) break;
    alpha -= step * galpha;
    beta0 -= step * gbeta;
  }
  model.alpha_ = std::move(alpha);
  model.beta0_ = beta0;
  return model;
}

double SvmModel::decision(const Vector& x) const {
  double acc = beta0_;
  for (int i = 0; i < train_x_.rows(); ++i) {
    acc += alpha_(i) * train_y_(i) *
           gaussian_kernel(train_x_.row(i).transpose(), x, cfg_);
  }
  return acc;
}

std::pair<Matrix, Matrix> normalize_pooled(const Matrix& source,
                                           const Matrix& target) {
  if (source.cols() != target.cols()) {
    throw DataError("normalize_pooled: feature dimensions differ");
  }
  const int n = static_cast<int>(source.rows() + target.rows());
  Matrix src = source;
  Matrix tgt = target;
  for (int j = 0; j < source.cols(); ++j) {
    const double sum = source.col(j).sum() + target.col(j).sum();
    const double mean = sum / n;
    const double sq = (source.col(j).array() - mean).square().sum() +
                      (target.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(sq / n);
    if (sd <= 1e-12) continue;  // constant column passes through untouched
    src.col(j) = (source.col(j).array() - mean) / sd;
    tgt.col(j) = (target.col(j).array() - mean) / sd;
  }
  return {std::move(src), std::move(tgt)};
}

std::vector<int> svm_offline(const Matrix& source_x, const Vector& source_y,
                             const Matrix& target_x, const SvmOptions& opts) {
  auto [src, tgt] = normalize_pooled(source_x, target_x);
  const SvmModel model = SvmModel::train(src, source_y, opts);
  std::vector<int> preds(tgt.rows());
  for (int t = 0; t < tgt.rows(); ++t) {
    preds[t] = model.predict(tgt.row(t).transpose());
  }
  return preds;
}

std::vector<int> svm_online(const Matrix& source_x, const Vector& source_y,
                            const Matrix& target_x, const SvmOptions& opts) {
  const SvmModel model = SvmModel::train(source_x, source_y, opts);
  std::vector<int> preds(target_x.rows());
  for (int t = 0; t < target_x.rows(); ++t) {
    preds[t] = model.predict(target_x.row(t).transpose());
  }
  return preds;
}

AlignedFeatures subspace_align(const Matrix& source_x, const Matrix& target_x,
                               int d) {
  if (d < 1) throw ParameterError("subspace_align: d must be at least 1");
  if (source_x.cols() != target_x.cols()) {
    throw DataError("subspace_align: feature dimensions differ");
  }
  Pca src = principal_subspace(source_x, d);
  Pca tgt = principal_subspace(target_x, d);
  const int keep =
      std::min(static_cast<int>(src.basis.cols()), static_cast<int>(tgt.basis.cols()));
  const Matrix xs = src.basis.leftCols(keep);
  const Matrix xt = tgt.basis.leftCols(keep);

  const Matrix align = xs.transpose() * xt;
  AlignedFeatures out;
  out.source = (source_x.rowwise() - src.mean) * xs * align;
  out.target = (target_x.rowwise() - tgt.mean) * xt;
  out.dim = keep;
  return out;
}

std::vector<int> sa_offline(const Matrix& source_x, const Vector& source_y,
                            const Matrix& target_x, int d,
                            const SvmOptions& opts) {
  const AlignedFeatures aligned = subspace_align(source_x, target_x, d);
  const SvmModel model = SvmModel::train(aligned.source, source_y, opts);
  std::vector<int> preds(aligned.target.rows());
  for (int t = 0; t < aligned.target.rows(); ++t) {
    preds[t] = model.predict(aligned.target.row(t).transpose());
  }
  return preds;
}

std::vector<int> sa_online(const Matrix& source_x, const Vector& source_y,
                           const Matrix& target_x, int d,
                           const SvmOptions& opts) {
  if (d < 1) throw ParameterError("sa_online: d must be at least 1");
  const SvmModel bootstrap = SvmModel::train(source_x, source_y, opts);
  // Streaming variant: no normalization or centering statistics of the
  // target are assumed available, so the subspaces come from raw second
  // moments and the data is projected uncentered.
  const Pca src = raw_subspace(source_x, d);

  std::vector<int> preds(target_x.rows());
  Vector warm_alpha;
  double warm_beta0 = 0.0;
  for (int t = 0; t < target_x.rows(); ++t) {
    const int seen = t + 1;
    if (seen < std::max(d, 2)) {
      preds[t] = bootstrap.predict(target_x.row(t).transpose());
      continue;
    }
    const Pca tgt = raw_subspace(target_x.topRows(seen), d);
    const int keep = std::min(static_cast<int>(src.basis.cols()),
                              static_cast<int>(tgt.basis.cols()));
    const Matrix xs = src.basis.leftCols(keep);
    const Matrix xt = tgt.basis.leftCols(keep);
    const Matrix aligned_src = source_x * xs * (xs.transpose() * xt);
    const SvmModel model =
        SvmModel::train(aligned_src, source_y, opts, warm_alpha, warm_beta0);
    warm_alpha = model.alpha();
    warm_beta0 = model.beta0();
    const Vector proj = (target_x.row(t) * xt).transpose();
    preds[t] = model.predict(proj);
  }
  return preds;
}

int majority_vote(const std::vector<int>& votes) {
  if (votes.empty()) throw ParameterError("majority_vote: empty vote set");
  int pos = 0, neg = 0;
  for (int v : votes) {
    if (v == 1) {
      ++pos;
    } else if (v == -1) {
      ++neg;
    } else {
      throw DataError("majority_vote: votes must be +1 or -1");
    }
  }
  if (pos > neg) return 1;
  return -1;  // ties resolve to the conservative class
}

}  // namespace onda
