#include "onda/preprocess.hpp"

#include <algorithm>
#include <limits>

namespace onda {

int Mask::region_size() const {
  int n = 0;
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c)
      if (bits(r, c)) ++n;
  return n;
}

MaskedFrame apply_mask(const Frame& frame, const Mask& mask) {
  if (frame.pixels.rows() != mask.bits.rows() ||
      frame.pixels.cols() != mask.bits.cols()) {
    throw DataError("apply_mask: frame and mask dimensions differ");
  }
  if (!frame.pixels.allFinite()) {
    throw DataError("apply_mask: frame contains non-finite values");
  }
  MaskedFrame out{mask, {}};
  out.values.reserve(static_cast<std::size_t>(mask.region_size()));
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.bits(r, c)) out.values.push_back(frame.pixels(r, c));
  if (out.values.empty()) throw DataError("apply_mask: mask has empty support");
  return out;
}

Compressor::Compressor(const Mask& mask, int window) {
  if (window < 1 || window % 2 == 0) {
    throw ParameterError("compress: window must be an odd positive integer");
  }
  frame_rows_ = mask.rows();
  frame_cols_ = mask.cols();

  // Bounding box of the mask support.
  int r0 = std::numeric_limits<int>::max(), r1 = -1;
  int c0 = std::numeric_limits<int>::max(), c1 = -1;
  for (int r = 0; r < frame_rows_; ++r) {
    for (int c = 0; c < frame_cols_; ++c) {
      if (!mask.bits(r, c)) continue;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
  }
  if (r1 < 0) throw DataError("compress: mask has empty support");

  const int half = window / 2;
  for (int r = r0 + half; r <= r1; r += window) {
    for (int c = c0 + half; c <= c1; c += window) {
      if (!mask.bits(r, c)) continue;  // vertices only at in-mask centers
      std::vector<int> pix;
      for (int rr = std::max(0, r - half);
           rr <= std::min(frame_rows_ - 1, r + half); ++rr) {
        for (int cc = std::max(0, c - half);
             cc <= std::min(frame_cols_ - 1, c + half); ++cc) {
          if (mask.bits(rr, cc)) pix.push_back(rr * frame_cols_ + cc);
        }
      }
      grid_.coords.emplace_back(r, c);
      members_.push_back(std::move(pix));
    }
  }
  if (grid_.coords.empty()) {
    throw DataError("compress: no window centers fall inside the mask");
  }
}

GraphSignal Compressor::apply(const Frame& frame) const {
  if (frame.pixels.rows() != frame_rows_ || frame.pixels.cols() != frame_cols_) {
    throw DataError("compress: frame dimensions do not match the mask");
  }
  const double* base = frame.pixels.data();
  GraphSignal out;
  out.values.resize(grid_.vertex_count());
  for (int v = 0; v < grid_.vertex_count(); ++v) {
    double sum = 0.0;
    for (int idx : members_[v]) {
      const int r = idx / frame_cols_;
      const int c = idx % frame_cols_;
      sum += base[r + static_cast<long>(c) * frame_rows_];  // column-major
    }
    out.values[v] = sum / static_cast<double>(members_[v].size());
  }
  return out;
}

std::pair<IrregularGrid, GraphSignal> compress(const MaskedFrame& masked,
                                               int window) {
  // Rebuild a full frame; pixels outside the support are never read.
  Frame frame{Matrix::Zero(masked.mask.rows(), masked.mask.cols())};
  std::size_t k = 0;
  for (int r = 0; r < masked.mask.rows(); ++r)
    for (int c = 0; c < masked.mask.cols(); ++c)
      if (masked.mask.bits(r, c)) frame.pixels(r, c) = masked.values.at(k++);
  Compressor comp(masked.mask, window);
  return {comp.grid(), comp.apply(frame)};
}

}  // namespace onda
