#pragma once

#include <string>
#include <vector>

#include "onda/graph.hpp"
#include "onda/optim.hpp"
#include "onda/preprocess.hpp"

namespace onda {

/// Generic numeric CSV with a header row.
struct Table {
  std::vector<std::string> header;
  Matrix data;
};

Table read_table(const std::string& path);
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Matrix& data);

/// Signals CSV: header of vertex ids v<row>_<col>, one row per time step.
void write_signals_csv(const std::string& path, const IrregularGrid& grid,
                       const Matrix& signals);
Matrix read_signals_csv(const std::string& path);

/// Feature CSV: columns t[,label],f0..f{D-1}. The label column is present for
/// labeled streams.
struct FeatureFile {
  Matrix features;
  std::vector<int> labels;
  bool has_labels = false;
};

FeatureFile read_features_csv(const std::string& path);
void write_features_csv(const std::string& path, const Matrix& features,
                        const std::vector<int>* labels);

/// Mask file: PGM (P2 or P5, nonzero = inside) or CSV of 0/1.
Mask read_mask(const std::string& path);

/// Raw frames: a directory of per-frame CSV files (sorted by name) or one
/// combined CSV whose rows are row-major flattened frames of the given shape.
std::vector<Frame> read_frames(const std::string& path, int rows, int cols);

/// Versioned binary cache of a graph and its Laplacian eigenbasis
/// (little-endian, row-major doubles).
struct GraphCache {
  IrregularGrid grid;
  double sigma = 0.0;
  EigenBasis basis;
};

void save_graph_cache(const std::string& path, const GraphCache& cache);
GraphCache load_graph_cache(const std::string& path);

/// Versioned binary model checkpoint; restores an equivalent optimizer state
/// so a stream can be resumed.
void save_checkpoint(const std::string& path, const DaState& state);
DaState load_checkpoint(const std::string& path);

}  // namespace onda
