#pragma once

#include <cstdint>
#include <vector>

#include "onda/common.hpp"
#include "onda/graph.hpp"

namespace onda {

/// Generator settings for heterogeneous-subject streams. Everything is
/// deterministic given `seed`.
struct SynthConfig {
  int n_subjects = 4;
  int frames_per_subject = 144;  // 24 h at 10-minute cadence
  int grid_m = 500;              // vertex count per subject
  int transition_frame = 48;     // viable -> unviable switch (8 h)
  int excl_halfwidth = 18;       // frames dropped around the transition (3 h)
  int cadence_minutes = 10;
  double noise = 0.3;            // i.i.d. vertex noise level
  double level_shift = 2.0;      // per-subject baseline offset spread
  double scale_spread = 0.15;    // per-subject multiplicative spread
  double rotation_spread = 0.35; // per-subject spatial-pattern mixing strength
  double base_temp = 30.0;
  double amp_viable = 0.8;       // pattern amplitude std before the transition
  double amp_unviable = 0.4;     // and after it
  double cooling_drop = 3.0;     // mean level drop after the transition
  int n_patterns = 6;
  int feature_dim = 50;          // D
  int avg_window = 18;           // frames averaged for graph construction
  double sigma = 0.5;            // graph scale; <= 0 selects the default
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-frame feature stream of one subject with its viability labels and the
/// scoring exclusion window [excluded_begin, excluded_end).
struct SubjectStream {
  int subject_id = 0;
  Matrix features;           // frames x D
  std::vector<int> labels;   // +1 viable, -1 unviable
  int cadence_minutes = 10;
  int excluded_begin = 0;
  int excluded_end = 0;

  int frames() const { return static_cast<int>(features.rows()); }
  bool scored(int frame) const {
    return frame < excluded_begin || frame >= excluded_end;
  }
};

/// Vertex-level product of the generator, before the spectral pipeline.
struct SubjectRaw {
  int subject_id = 0;
  IrregularGrid grid;
  Matrix signals;            // frames x M
  std::vector<int> labels;
  int excluded_begin = 0;
  int excluded_end = 0;
};

/// Row-major elliptical vertex layout with exactly m vertices.
IrregularGrid ellipse_grid(int m);

SubjectRaw synth_subject_raw(const SynthConfig& cfg, int subject_index);

/// Graph construction + GFT feature extraction applied to one raw subject.
SubjectStream stream_from_raw(const SubjectRaw& raw, const SynthConfig& cfg);

std::vector<SubjectStream> synth_streams(const SynthConfig& cfg);

}  // namespace onda
