#include "onda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace onda {

namespace {

constexpr int kMaxPatterns = 10;

// Fluctuation modes ride on the isotherms of the base field: each canonical
// pattern is a function of the (normalized) base value, so frames stay smooth
// with respect to the value-similarity graph built from the averaged signal.
// Frequencies stay within [1, 3] half-periods and phases are golden-angle
// spaced, which keeps the patterns distinct without making the averaged
// signal fold over itself.
double pattern_value(int which, int total, double b) {
  using std::numbers::pi;
  const double theta = 0.5 * pi * (b + 1.0);  // b in [-1, 1] -> [0, pi]
  const double freq =
      total > 1 ? 1.0 + 2.0 * which / static_cast<double>(total - 1) : 2.0;
  return std::cos(freq * theta + 2.399963 * which);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects < 1) throw ParameterError("synth: n_subjects must be >= 1");
  if (frames_per_subject < 2) throw ParameterError("synth: need >= 2 frames");
  if (grid_m < 2) throw ParameterError("synth: grid_m must be >= 2");
  if (transition_frame < 1 || transition_frame >= frames_per_subject) {
    throw ParameterError("synth: transition_frame must lie inside the stream");
  }
  if (excl_halfwidth < 0) throw ParameterError("synth: excl_halfwidth negative");
  if (cadence_minutes < 1) throw ParameterError("synth: cadence must be >= 1");
  if (noise < 0.0) throw ParameterError("synth: noise must be nonnegative");
  if (n_patterns < 1 || n_patterns > kMaxPatterns) {
    throw ParameterError("synth: n_patterns out of range [1, 10]");
  }
  if (feature_dim < 1 || feature_dim > grid_m) {
    throw ParameterError("synth: feature_dim out of range [1, grid_m]");
  }
  if (avg_window < 1 || avg_window > transition_frame) {
    throw ParameterError(
        "synth: avg_window must fit inside the pre-transition phase");
  }
  if (amp_viable < 0.0 || amp_unviable < 0.0) {
    throw ParameterError("synth: amplitudes must be nonnegative");
  }
}

IrregularGrid ellipse_grid(int m) {
  if (m < 2) throw ParameterError("ellipse_grid: need at least 2 vertices");
  const double aspect = 1.3;
  double b = std::sqrt(m / (std::numbers::pi * aspect));

  // Grow until the lattice inside the ellipse holds at least m points.
  for (;; b *= 1.05) {
    const double a = aspect * b;
    const int rmax = static_cast<int>(std::ceil(b));
    const int cmax = static_cast<int>(std::ceil(a));
    struct Cand {
      double rad;
      int row, col;
    };
    std::vector<Cand> inside;
    for (int row = -rmax; row <= rmax; ++row) {
      for (int col = -cmax; col <= cmax; ++col) {
        const double rad = (col / a) * (col / a) + (row / b) * (row / b);
        if (rad <= 1.0) inside.push_back({rad, row, col});
      }
    }
    if (static_cast<int>(inside.size()) < m) continue;
    // Keep the m points closest to the center, then restore row-major order.
    std::stable_sort(inside.begin(), inside.end(),
                     [](const Cand& x, const Cand& y) { return x.rad < y.rad; });
    inside.resize(m);
    std::sort(inside.begin(), inside.end(), [](const Cand& x, const Cand& y) {
      return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    IrregularGrid grid;
    grid.coords.reserve(m);
    for (const Cand& c : inside) {
      grid.coords.emplace_back(c.row + rmax, c.col + cmax);
    }
    return grid;
  }
}

SubjectRaw synth_subject_raw(const SynthConfig& cfg, int subject_index) {
  cfg.validate();
  std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(subject_index)));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SubjectRaw raw;
  raw.subject_id = subject_index;
  raw.grid = ellipse_grid(cfg.grid_m);
  const int m = raw.grid.vertex_count();
  const int frames = cfg.frames_per_subject;
  const int p = cfg.n_patterns;

  // Normalized coordinates in [-1, 1] per axis.
  int rmax = 0, cmax = 0;
  for (const auto& [r, c] : raw.grid.coords) {
    rmax = std::max(rmax, r);
    cmax = std::max(cmax, c);
  }
  Vector ux(m), uy(m);
  for (int v = 0; v < m; ++v) {
    uy(v) = 2.0 * raw.grid.coords[v].first / std::max(1, rmax) - 1.0;
    ux(v) = 2.0 * raw.grid.coords[v].second / std::max(1, cmax) - 1.0;
  }

  // Subject-level distortions: baseline, scale, a mixing of the canonical
  // spatial patterns, and the warm-bump geometry itself (position, width,
  // tilt), so no two subjects share a spatial layout.
  const double scale = 1.0 + cfg.scale_spread * unit(rng);
  const double level = cfg.base_temp * scale + cfg.level_shift * unit(rng);
  Matrix mixing = Matrix::Identity(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      mixing(i, j) += cfg.rotation_spread * gauss(rng) / std::sqrt(double(p));
    }
  }
  const double het = cfg.rotation_spread;
  const double bump_cx = 0.35 * het * unit(rng);
  const double bump_cy = 0.35 * het * unit(rng);
  const double bump_w = 1.0 + 0.25 * het * unit(rng);
  const double tilt_angle = std::numbers::pi * unit(rng);

  Vector base_field(m);
  for (int v = 0; v < m; ++v) {
    const double dx = ux(v) - bump_cx;
    const double dy = uy(v) - bump_cy;
    base_field(v) =
        12.0 * std::exp(-1.5 * (dx * dx + dy * dy) / (bump_w * bump_w)) +
        0.5 * (std::cos(tilt_angle) * ux(v) + std::sin(tilt_angle) * uy(v));
  }
  const double bmin = base_field.minCoeff();
  const double bmax = base_field.maxCoeff();
  Vector base_norm(m);
  for (int v = 0; v < m; ++v) {
    base_norm(v) = 2.0 * (base_field(v) - bmin) / (bmax - bmin) - 1.0;
  }

  // Mixed patterns, demeaned so amplitude fluctuations never leak into the
  // overall level, and RMS-normalized.
  Matrix patterns(m, p);
  for (int j = 0; j < p; ++j) {
    for (int v = 0; v < m; ++v) {
      double acc = 0.0;
      for (int k = 0; k < p; ++k) {
        acc += mixing(j, k) * pattern_value(k, p, base_norm(v));
      }
      patterns(v, j) = acc;
    }
    patterns.col(j).array() -= patterns.col(j).mean();
    const double rms = patterns.col(j).norm() / std::sqrt(double(m));
    if (rms > 0.0) patterns.col(j) /= rms;
  }

  // Cooling profile: unit mean so cooling_drop keeps its meaning as the mean
  // level drop, but weighted toward the warm bump, which separates the
  // classes spatially and not only in overall level. The profile mixes in a
  // subject-specific pattern combination, so the cooling direction itself
  // rotates across subjects.
  Vector cooling = base_field;
  {
    Vector mix(p);
    for (int j = 0; j < p; ++j) {
      mix(j) = 0.5 * het * gauss(rng) / std::sqrt(double(p));
    }
    cooling += base_field.mean() * (patterns * mix);
    cooling /= cooling.mean();
  }

  raw.signals.resize(frames, m);
  raw.labels.resize(frames);
  for (int t = 0; t < frames; ++t) {
    const bool viable = t < cfg.transition_frame;
    raw.labels[t] = viable ? 1 : -1;
    const double amp = viable ? cfg.amp_viable : cfg.amp_unviable;
    // Fast cooling ramp over the first hour after the transition, then a slow
    // residual drift for the rest of the stream: the unviable organ keeps
    // cooling, so the target distribution never becomes stationary.
    const int since = t - cfg.transition_frame;
    const double drop =
        viable ? 0.0
               : cfg.cooling_drop *
                     (std::min(1.0, (since + 1) / 6.0) +
                      0.4 * since /
                          std::max(1.0, double(frames - cfg.transition_frame)));
    Vector coeffs(p);
    for (int j = 0; j < p; ++j) coeffs(j) = amp * gauss(rng);
    Vector frame = level * Vector::Ones(m) +
                   scale * (base_field + patterns * coeffs - drop * cooling);
    for (int v = 0; v < m; ++v) frame(v) += cfg.noise * gauss(rng);
    raw.signals.row(t) = frame.transpose();
  }

  raw.excluded_begin = std::max(0, cfg.transition_frame - cfg.excl_halfwidth);
  raw.excluded_end =
      std::min(frames, cfg.transition_frame + cfg.excl_halfwidth + 1);
  return raw;
}

SubjectStream stream_from_raw(const SubjectRaw& raw, const SynthConfig& cfg) {
  const EigenBasis basis =
      basis_from_signals(raw.signals, cfg.avg_window, cfg.sigma);
  SubjectStream stream;
  stream.subject_id = raw.subject_id;
  stream.features = gft_features(basis, raw.signals, cfg.feature_dim);
  stream.labels = raw.labels;
  stream.cadence_minutes = cfg.cadence_minutes;
  stream.excluded_begin = raw.excluded_begin;
  stream.excluded_end = raw.excluded_end;
  return stream;
}

std::vector<SubjectStream> synth_streams(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SubjectStream> streams;
  streams.reserve(cfg.n_subjects);
  for (int s = 0; s < cfg.n_subjects; ++s) {
    streams.push_back(stream_from_raw(synth_subject_raw(cfg, s), cfg));
  }
  return streams;
}

}  // namespace onda
