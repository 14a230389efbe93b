#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "onda/common.hpp"

namespace onda {

/// Set of retained pixels acting as graph vertices. Coordinates are kept for
/// plotting and file headers; edge weights never depend on them.
struct IrregularGrid {
  std::vector<std::pair<int, int>> coords;  // (row, col), unique, row-major order

  int vertex_count() const { return static_cast<int>(coords.size()); }
};

/// One time step of vertex values on an IrregularGrid.
struct GraphSignal {
  Vector values;
  long time_index = 0;
};

/// Symmetric similarity weights with zero diagonal, entries in [0, 1].
struct AdjacencyMatrix {
  Matrix weights;
  double sigma = 1.0;
};

/// Orthonormal eigenvectors (columns) and ascending eigenvalues of a graph
/// Laplacian. Column signs are canonicalized so the largest-magnitude entry
/// of each eigenvector is positive.
struct EigenBasis {
  Matrix vectors;
  Vector values;

  int size() const { return static_cast<int>(values.size()); }
};

/// First D graph-frequency coefficients of a transformed signal.
struct SpectralFeatures {
  Vector coeffs;

  int dim() const { return static_cast<int>(coeffs.size()); }
};

/// Mean of the first `window` rows of a time-by-vertex signal matrix.
Vector average_signal(const Matrix& signals, int window);

/// Scale fallback used when the config leaves sigma unset: the variance of
/// squared value differences over at most 10,000 sampled vertex pairs.
/// Returns 1.0 for (near-)constant signals where the variance degenerates.
double default_sigma(const Vector& averaged, std::uint64_t seed = 0x5eed);

/// Similarity weights from an averaged signal:
/// A_ij = exp(-(x_i - x_j)^2 / sigma) off the diagonal, 0 on it.
AdjacencyMatrix build_adjacency(const Vector& averaged, double sigma);

/// Combinatorial Laplacian L = D - A with D the diagonal degree matrix.
Matrix laplacian(const AdjacencyMatrix& adj);

/// Dense symmetric eigendecomposition of a Laplacian. Rejects matrices that
/// are not symmetric within 1e-10 and grids above 10,000 vertices.
EigenBasis eigendecompose(const Matrix& laplacian_matrix);

/// Forward transform: coefficients = F^T s.
Vector gft(const EigenBasis& basis, const Vector& signal);

/// Inverse transform: s = F c. Accepts coefficient vectors shorter than the
/// basis size (treated as zero-padded).
Vector inverse_gft(const EigenBasis& basis, const Vector& coeffs);

/// First `d` entries of a coefficient vector, 1 <= d <= size.
SpectralFeatures truncate_features(const Vector& coeffs, int d);

/// Relative l2 error of reconstructing `signal` from its first `d`
/// coefficients (the rest zeroed), ||F c' - s|| / ||s||.
double reconstruct_error(const EigenBasis& basis, const Vector& signal, int d);

/// Basis from a signal stream: average the first `avg_window` rows, build the
/// adjacency (sigma <= 0 selects default_sigma), take the Laplacian eigenbasis.
EigenBasis basis_from_signals(const Matrix& signals, int avg_window,
                              double sigma = 0.0);

/// Per-row GFT features: row t of the result is the first `d` coefficients of
/// signals.row(t).
Matrix gft_features(const EigenBasis& basis, const Matrix& signals, int d);

}  // namespace onda
