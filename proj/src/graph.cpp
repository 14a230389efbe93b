#include "onda/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

namespace onda {

namespace {

constexpr int kMaxDenseVertices = 10000;

void require_finite(const Vector& v, const char* where) {
  if (!v.allFinite()) {
    throw DataError(std::string(where) + ": input contains non-finite values");
  }
}

// Flip each eigenvector so its largest-magnitude entry is positive. Keeps the
// basis orthonormal and makes signs reproducible across similar graphs.
void canonicalize_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

}  // namespace

Vector average_signal(const Matrix& signals, int window) {
  if (window < 1 || window > signals.rows()) {
    throw ParameterError("average_signal: window out of range [1, rows]");
  }
  return signals.topRows(window).colwise().mean().transpose();
}

double default_sigma(const Vector& averaged, std::uint64_t seed) {
  const int m = static_cast<int>(averaged.size());
  if (m < 2) throw ParameterError("default_sigma: need at least 2 vertices");
  require_finite(averaged, "default_sigma");

  const long distinct_pairs = static_cast<long>(m) * (m - 1);
  const long n_pairs = std::min(10000L, distinct_pairs);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, m - 1);

  // Welford accumulation of the squared-difference samples.
  double mean = 0.0, m2 = 0.0;
  for (long k = 0; k < n_pairs; ++k) {
    int i = pick(rng);
    int j = pick(rng);
    while (j == i) j = pick(rng);
    const double d = averaged[i] - averaged[j];
    const double x = d * d;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  const double var = m2 / static_cast<double>(n_pairs);
  if (!(var > 0.0) || !std::isfinite(var)) return 1.0;
  return var;
}

AdjacencyMatrix build_adjacency(const Vector& averaged, double sigma) {
  const int m = static_cast<int>(averaged.size());
  if (m < 2) throw ParameterError("build_adjacency: need at least 2 vertices");
  if (!(sigma > 0.0)) throw ParameterError("build_adjacency: sigma must be positive");
  require_finite(averaged, "build_adjacency");

  Matrix a = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = averaged[i] - averaged[j];
      const double w = std::exp(-(d * d) / sigma);
      a(i, j) = w;
      a(j, i) = w;
    }
  }
  return {std::move(a), sigma};
}

Matrix laplacian(const AdjacencyMatrix& adj) {
  const auto& a = adj.weights;
  if (a.rows() != a.cols()) throw DataError("laplacian: adjacency not square");
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

EigenBasis eigendecompose(const Matrix& l) {
  if (l.rows() != l.cols()) throw DataError("eigendecompose: matrix not square");
  if (l.rows() > kMaxDenseVertices) {
    throw ParameterError(
        "eigendecompose: grid exceeds the dense limit of 10000 vertices");
  }
  const double asym = (l - l.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw DataError("eigendecompose: matrix not symmetric (max asymmetry " +
                    std::to_string(asym) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(l);
  if (solver.info() != Eigen::Success) {
    throw DataError("eigendecompose: eigensolver failed to converge");
  }
  EigenBasis basis{solver.eigenvectors(), solver.eigenvalues()};
  canonicalize_signs(basis.vectors);
  return basis;
}

Vector gft(const EigenBasis& basis, const Vector& signal) {
  if (signal.size() != basis.vectors.rows()) {
    throw DataError("gft: signal length does not match basis size");
  }
  return basis.vectors.transpose() * signal;
}

Vector inverse_gft(const EigenBasis& basis, const Vector& coeffs) {
  if (coeffs.size() > basis.vectors.cols()) {
    throw DataError("inverse_gft: more coefficients than basis vectors");
  }
  return basis.vectors.leftCols(coeffs.size()) * coeffs;
}

SpectralFeatures truncate_features(const Vector& coeffs, int d) {
  if (d < 1 || d > coeffs.size()) {
    throw ParameterError("truncate_features: d out of range [1, M]");
  }
  return {coeffs.head(d)};
}

double reconstruct_error(const EigenBasis& basis, const Vector& signal, int d) {
  const double norm = signal.norm();
  if (!(norm > 0.0)) {
    throw DataError("reconstruct_error: undefined ratio for a zero signal");
  }
  if (d < 1 || d > basis.size()) {
    throw ParameterError("reconstruct_error: d out of range [1, M]");
  }
  const Vector coeffs = gft(basis, signal);
  const Vector recon = inverse_gft(basis, coeffs.head(d));
  return (recon - signal).norm() / norm;
}

EigenBasis basis_from_signals(const Matrix& signals, int avg_window,
                              double sigma) {
  const Vector averaged = average_signal(signals, avg_window);
  const double scale = sigma > 0.0 ? sigma : default_sigma(averaged);
  return eigendecompose(laplacian(build_adjacency(averaged, scale)));
}

Matrix gft_features(const EigenBasis& basis, const Matrix& signals, int d) {
  if (signals.cols() != basis.vectors.rows()) {
    throw DataError("gft_features: signal width does not match basis size");
  }
  if (d < 1 || d > basis.size()) {
    throw ParameterError("gft_features: d out of range [1, M]");
  }
  // (F^T S^T)^T = S F; keep only the low-frequency block.
  return signals * basis.vectors.leftCols(d);
}

}  // namespace onda
