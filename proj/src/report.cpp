#include "onda/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace onda {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

}  // namespace

std::string format_metric(double value) {
  if (std::isnan(value)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

void write_summary_csv(const std::vector<EvalReport>& reports,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  out << "subject";
  for (const EvalReport& r : reports) {
    out << ',' << r.method << "_acc," << r.method << "_prc," << r.method
        << "_rcl";
  }
  out << '\n';

  std::set<int> subjects;
  for (const EvalReport& r : reports) {
    for (const FoldResult& f : r.folds) subjects.insert(f.target_id);
  }
  for (int subject : subjects) {
    out << subject;
    for (const EvalReport& r : reports) {
      const FoldResult* fold = nullptr;
      for (const FoldResult& f : r.folds) {
        if (f.target_id == subject) fold = &f;
      }
      if (fold == nullptr || fold->failed) {
        out << ",failed,failed,failed";
      } else {
        out << ',' << format_metric(fold->metrics.acc) << ','
            << format_metric(fold->metrics.prc) << ','
            << format_metric(fold->metrics.rcl);
      }
    }
    out << '\n';
  }
  if (!subjects.empty()) {
    out << "Avg";
    for (const EvalReport& r : reports) {
      out << ',' << format_metric(r.average.acc) << ','
          << format_metric(r.average.prc) << ','
          << format_metric(r.average.rcl);
    }
    out << '\n';
  }
}

void write_per_frame_csv(const std::vector<EvalReport>& reports,
                         int cadence_minutes, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "method,target_subject,frame,minutes,true_label,predicted_label,scored\n";
  for (const EvalReport& r : reports) {
    for (const FoldResult& f : r.folds) {
      if (f.failed) continue;
      for (std::size_t t = 0; t < f.truth.size(); ++t) {
        const int frame = static_cast<int>(t);
        const bool scored =
            frame < f.excluded_begin || frame >= f.excluded_end;
        out << r.method << ',' << f.target_id << ',' << frame << ','
            << frame * cadence_minutes << ',' << f.truth[t] << ','
            << f.predicted[t] << ',' << (scored ? 1 : 0) << '\n';
      }
    }
  }
}

void write_timeline_svg(const EvalReport& report, const std::string& path) {
  const int band_h = 14;
  const int fold_h = 3 * band_h + 26;
  const int width = 760;
  const int left = 90;
  const int n_folds = static_cast<int>(report.folds.size());
  const int height = 30 + fold_h * std::max(1, n_folds);

  std::ofstream out = open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<text x=\"10\" y=\"18\" font-size=\"13\">" << report.method
      << ": true vs predicted viability</text>\n";

  int y = 30;
  for (const FoldResult& f : report.folds) {
    out << "<text x=\"10\" y=\"" << y + band_h << "\" font-size=\"11\">subject "
        << f.target_id << "</text>\n";
    if (f.failed) {
      out << "<text x=\"" << left << "\" y=\"" << y + band_h
          << "\" font-size=\"11\" fill=\"#c62828\">fold failed</text>\n";
      y += fold_h;
      continue;
    }
    const int frames = static_cast<int>(f.truth.size());
    const double step = static_cast<double>(width - left - 10) / frames;
    auto band = [&](const std::vector<int>& labels, int row,
                    const char* title) {
      const int by = y + row * (band_h + 4);
      out << "<text x=\"" << left - 50 << "\" y=\"" << by + 11
          << "\" font-size=\"9\">" << title << "</text>\n";
      for (int t = 0; t < frames; ++t) {
        const char* color = labels[t] == 1 ? "#4caf50" : "#9e9e9e";
        out << "<rect x=\"" << left + t * step << "\" y=\"" << by
            << "\" width=\"" << step + 0.5 << "\" height=\"" << band_h
            << "\" fill=\"" << color << "\"/>\n";
      }
    };
    band(f.truth, 0, "true");
    band(f.predicted, 1, "pred");
    // Shade the window excluded from scoring.
    if (f.excluded_end > f.excluded_begin) {
      out << "<rect x=\"" << left + f.excluded_begin * step << "\" y=\"" << y
          << "\" width=\"" << (f.excluded_end - f.excluded_begin) * step
          << "\" height=\"" << 2 * band_h + 4
          << "\" fill=\"#000000\" fill-opacity=\"0.25\"/>\n";
    }
    y += fold_h;
  }
  out << "</svg>\n";
}

void emit_report(const std::vector<EvalReport>& reports, int cadence_minutes,
                 const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_summary_csv(reports, (dir / "summary.csv").string());
  write_per_frame_csv(reports, cadence_minutes, (dir / "per_frame.csv").string());
  for (const EvalReport& r : reports) {
    write_timeline_svg(r, (dir / ("timeline_" + r.method + ".svg")).string());
  }
}

}  // namespace onda
