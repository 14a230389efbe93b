#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "onda/common.hpp"
#include "onda/graph.hpp"

namespace onda {

/// One rectangular raw frame.
struct Frame {
  Matrix pixels;
};

/// Binary region-of-interest mask, same shape as the frames it applies to.
struct Mask {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> bits;

  int rows() const { return static_cast<int>(bits.rows()); }
  int cols() const { return static_cast<int>(bits.cols()); }
  int region_size() const;
};

/// A frame restricted to a mask: values kept in row-major support order.
struct MaskedFrame {
  Mask mask;
  std::vector<double> values;
};

MaskedFrame apply_mask(const Frame& frame, const Mask& mask);

/// Precomputed window layout for one (mask, window) pair. Applying it to every
/// frame of a subject yields signals over one fixed vertex set: window centers
/// sit on a stride-w lattice anchored at the mask bounding box, a center in
/// the mask becomes a vertex, and each value is the mean of the in-mask pixels
/// of its w-by-w window.
class Compressor {
 public:
  Compressor(const Mask& mask, int window);

  const IrregularGrid& grid() const { return grid_; }
  GraphSignal apply(const Frame& frame) const;

 private:
  int frame_rows_ = 0;
  int frame_cols_ = 0;
  IrregularGrid grid_;
  std::vector<std::vector<int>> members_;  // flattened pixel indices per vertex
};

/// One-shot form of the Compressor for a single masked frame.
std::pair<IrregularGrid, GraphSignal> compress(const MaskedFrame& masked,
                                               int window);

}  // namespace onda
