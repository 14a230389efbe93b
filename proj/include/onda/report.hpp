#pragma once

#include <string>
#include <vector>

#include "onda/harness.hpp"

namespace onda {

/// Fixed-precision cell formatting shared by all report writers; NaN prints
/// as "NaN".
std::string format_metric(double value);

/// Summary table over all methods: one row per target subject plus an Avg
/// row, three metric columns per method.
void write_summary_csv(const std::vector<EvalReport>& reports,
                       const std::string& path);

/// Long-form per-frame table: method, target, frame, minutes, labels, scored.
void write_per_frame_csv(const std::vector<EvalReport>& reports,
                         int cadence_minutes, const std::string& path);

/// Per-target timeline of true vs predicted viability with the exclusion
/// window shaded.
void write_timeline_svg(const EvalReport& report, const std::string& path);

/// Writes summary.csv, per_frame.csv and one timeline_<method>.svg per
/// report into `out_dir`.
void emit_report(const std::vector<EvalReport>& reports, int cadence_minutes,
                 const std::string& out_dir);

}  // namespace onda
