#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "onda/config.hpp"
#include "onda/harness.hpp"
#include "onda/io.hpp"
#include "onda/report.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;  // key=value
};

onda::RunConfig resolve_config(const GlobalOpts& g) {
  onda::RunConfig cfg = g.config_path.empty()
                            ? onda::default_run_config()
                            : onda::load_run_config(g.config_path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw onda::ParameterError("--set expects key=value, got '" + kv + "'");
    }
    onda::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed_set) cfg.synth.seed = g.seed;
  return cfg;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Subject stream from a labeled feature file; the exclusion window sits
// around the single label transition, when one exists.
onda::SubjectStream stream_from_file(const std::string& path,
                                     const onda::RunConfig& cfg, int id) {
  const onda::FeatureFile file = onda::read_features_csv(path);
  if (!file.has_labels) {
    throw onda::DataError(path + ": source streams need a label column");
  }
  onda::SubjectStream stream;
  stream.subject_id = id;
  stream.features = file.features;
  stream.labels = file.labels;
  stream.cadence_minutes = cfg.synth.cadence_minutes;
  int transition = static_cast<int>(file.labels.size());
  for (std::size_t t = 1; t < file.labels.size(); ++t) {
    if (file.labels[t] != file.labels[t - 1]) {
      transition = static_cast<int>(t);
      break;
    }
  }
  if (transition < static_cast<int>(file.labels.size())) {
    stream.excluded_begin = std::max(0, transition - cfg.synth.excl_halfwidth);
    stream.excluded_end =
        std::min<int>(static_cast<int>(file.labels.size()),
                      transition + cfg.synth.excl_halfwidth + 1);
  }
  return stream;
}

int cmd_synth(const GlobalOpts& g, bool with_signals) {
  const onda::RunConfig cfg = resolve_config(g);
  fs::create_directories(g.out_dir);
  const auto streams = onda::synth_streams(cfg.synth);
  for (int s = 0; s < cfg.synth.n_subjects; ++s) {
    char name[64];
    std::snprintf(name, sizeof(name), "subject_%02d_features.csv", s);
    onda::write_features_csv((fs::path(g.out_dir) / name).string(),
                             streams[s].features, &streams[s].labels);
    if (with_signals) {
      const auto raw = onda::synth_subject_raw(cfg.synth, s);
      std::snprintf(name, sizeof(name), "subject_%02d_signals.csv", s);
      onda::write_signals_csv((fs::path(g.out_dir) / name).string(), raw.grid,
                              raw.signals);
    }
  }
  std::cout << "wrote " << cfg.synth.n_subjects << " subject streams to "
            << g.out_dir << "\n";
  return 0;
}

int cmd_preprocess(const std::string& frames_path, const std::string& mask_path,
                   int window, const std::string& out,
                   const std::string& grid_out) {
  const onda::Mask mask = onda::read_mask(mask_path);
  const auto frames = onda::read_frames(frames_path, mask.rows(), mask.cols());
  const onda::Compressor comp(mask, window);
  onda::Matrix signals(static_cast<Eigen::Index>(frames.size()),
                       comp.grid().vertex_count());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    signals.row(static_cast<Eigen::Index>(t)) =
        comp.apply(frames[t]).values.transpose();
  }
  onda::write_signals_csv(out, comp.grid(), signals);
  if (!grid_out.empty()) {
    onda::Matrix coords(comp.grid().vertex_count(), 2);
    for (int v = 0; v < comp.grid().vertex_count(); ++v) {
      coords(v, 0) = comp.grid().coords[v].first;
      coords(v, 1) = comp.grid().coords[v].second;
    }
    onda::write_table(grid_out, {"row", "col"}, coords);
  }
  std::cout << "compressed " << frames.size() << " frames to "
            << comp.grid().vertex_count() << " vertices\n";
  return 0;
}

int cmd_graph(const GlobalOpts& g, const std::string& signals_path,
              const std::string& cache_path) {
  const onda::RunConfig cfg = resolve_config(g);
  const onda::Matrix signals = onda::read_signals_csv(signals_path);
  const onda::Vector averaged =
      onda::average_signal(signals, cfg.synth.avg_window);
  const double sigma = cfg.synth.sigma > 0.0 ? cfg.synth.sigma
                                             : onda::default_sigma(averaged);
  const auto basis = onda::eigendecompose(
      onda::laplacian(onda::build_adjacency(averaged, sigma)));

  // Vertex coordinates are not recoverable from a signals CSV; store column
  // indices so the cache stays self-describing.
  onda::GraphCache cache;
  for (int v = 0; v < basis.size(); ++v) cache.grid.coords.emplace_back(0, v);
  cache.sigma = sigma;
  cache.basis = basis;
  onda::save_graph_cache(cache_path, cache);
  std::cout << "graph cache: M=" << basis.size() << " sigma=" << sigma
            << " -> " << cache_path << "\n";
  return 0;
}

int cmd_features(const GlobalOpts& g, const std::string& signals_path,
                 const std::string& cache_path, const std::string& out) {
  const onda::RunConfig cfg = resolve_config(g);
  const onda::Matrix signals = onda::read_signals_csv(signals_path);
  const auto cache = onda::load_graph_cache(cache_path);
  const onda::Matrix features =
      onda::gft_features(cache.basis, signals, cfg.synth.feature_dim);
  onda::write_features_csv(out, features, nullptr);
  std::cout << "wrote " << features.rows() << "x" << features.cols()
            << " features to " << out << "\n";
  return 0;
}

int cmd_fit(const GlobalOpts& g, const std::string& source_path,
            const std::string& target_path, int refresh_every,
            const std::string& out, const std::string& save_state,
            const std::string& load_state) {
  const onda::RunConfig cfg = resolve_config(g);
  const onda::FeatureFile target = onda::read_features_csv(target_path);

  onda::DaState state = [&] {
    if (!load_state.empty()) return onda::load_checkpoint(load_state);
    if (source_path.empty()) {
      throw onda::ParameterError("fit: need --source or --load-state");
    }
    const onda::SubjectStream source = stream_from_file(source_path, cfg, 0);
    auto [xs, ys] = onda::source_training_data(source);
    onda::Hyperparams hp = cfg.hp;
    hp.m = std::min(hp.m, static_cast<int>(xs.rows()));
    onda::DaState s = onda::make_state(xs, ys, hp);
    onda::fit_epoch(s);
    return s;
  }();

  const int frames = static_cast<int>(target.features.rows());
  const int refresh =
      std::max(1, refresh_every > 0 ? refresh_every : cfg.refresh_every);
  onda::Matrix rows(frames, 3);
  onda::DecisionCache cache = onda::make_decision_cache(state);
  for (int t = 0; t < frames; ++t) {
    if (t > 0 && t % refresh == 0) {
      onda::advance_time(state,
                         target.features.middleRows(t - refresh, refresh));
      onda::fit_epoch(state);
      cache = onda::make_decision_cache(state);
    }
    const auto pred =
        onda::predict_cached(state, cache, target.features.row(t).transpose());
    rows(t, 0) = t;
    rows(t, 1) = pred.label;
    rows(t, 2) = pred.margin;
  }
  onda::write_table(out, {"t", "predicted_label", "margin"}, rows);
  if (!save_state.empty()) onda::save_checkpoint(save_state, state);

  if (target.has_labels) {
    std::vector<int> pred(frames);
    for (int t = 0; t < frames; ++t) pred[t] = static_cast<int>(rows(t, 1));
    const auto m = onda::compute_metrics(target.labels, pred);
    std::cout << "acc=" << onda::format_metric(m.acc)
              << " prc=" << onda::format_metric(m.prc)
              << " rcl=" << onda::format_metric(m.rcl) << "\n";
  }
  std::cout << "wrote predictions to " << out << "\n";
  return 0;
}

int cmd_bench(const GlobalOpts& g, const std::string& method,
              const std::string& source_path, const std::string& target_path,
              const std::string& out) {
  const onda::RunConfig cfg = resolve_config(g);
  const onda::SubjectStream source = stream_from_file(source_path, cfg, 0);
  const onda::FeatureFile target = onda::read_features_csv(target_path);

  const auto preds =
      onda::make_method(method, cfg.harness())()->run(source, target.features);
  onda::Matrix rows(static_cast<Eigen::Index>(preds.size()), 2);
  for (std::size_t t = 0; t < preds.size(); ++t) {
    rows(static_cast<Eigen::Index>(t), 0) = static_cast<double>(t);
    rows(static_cast<Eigen::Index>(t), 1) = preds[t];
  }
  onda::write_table(out, {"t", "predicted_label"}, rows);
  std::cout << "wrote predictions to " << out << "\n";
  return 0;
}

int cmd_tune(const GlobalOpts& g, const std::string& sources_csv,
             const std::string& method, const std::string& out) {
  const onda::RunConfig cfg = resolve_config(g);
  std::vector<onda::SubjectStream> sources;
  if (sources_csv.empty()) {
    sources = onda::synth_streams(cfg.synth);
  } else {
    int id = 0;
    for (const std::string& path : split_list(sources_csv)) {
      sources.push_back(stream_from_file(path, cfg, id++));
    }
  }

  onda::RunConfig tuned = cfg;
  if (method == "proposed") {
    const auto [l1, l2] = onda::tune(sources, cfg.grid, cfg.harness());
    tuned.hp.lambda1 = l1;
    tuned.hp.lambda2 = l2;
    std::cout << "selected lambda1=" << l1 << " lambda2=" << l2 << "\n";
  } else if (method == "sa") {
    tuned.sa_dim = onda::tune_sa_dim(sources, cfg.sa_dim_grid, cfg.harness());
    std::cout << "selected sa_dim=" << tuned.sa_dim << "\n";
  } else {
    throw onda::ParameterError("tune: method must be proposed or sa");
  }
  if (!out.empty()) onda::save_run_config(tuned, out);
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& methods_csv) {
  const onda::RunConfig cfg = resolve_config(g);
  const auto streams = onda::synth_streams(cfg.synth);
  std::vector<onda::EvalReport> reports;
  for (const std::string& method : split_list(methods_csv)) {
    std::cout << "evaluating " << method << "..." << std::flush;
    reports.push_back(onda::loso_evaluate(
        streams, onda::make_method(method, cfg.harness()), method));
    std::cout << " acc=" << onda::format_metric(reports.back().average.acc)
              << "\n";
  }
  onda::emit_report(reports, cfg.synth.cadence_minutes, g.out_dir);
  std::cout << "report written to " << g.out_dir << "\n";
  return 0;
}

// Rebuild summary and timelines from a per-frame table written by eval.
int cmd_report(const GlobalOpts& g, const std::string& per_frame_path) {
  std::ifstream in(per_frame_path);
  if (!in) throw onda::DataError("cannot read file: " + per_frame_path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("method,", 0) != 0) {
    throw onda::DataError(per_frame_path + ": not a per-frame table");
  }
  std::map<std::string, std::map<int, onda::FoldResult>> grouped;
  std::vector<std::string> method_order;
  int cadence = 10;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string method, cell;
    std::getline(ss, method, ',');
    std::vector<double> nums;
    while (std::getline(ss, cell, ',')) nums.push_back(std::stod(cell));
    if (nums.size() != 6) throw onda::DataError("report: malformed row");
    const int target = static_cast<int>(nums[0]);
    const int frame = static_cast<int>(nums[1]);
    if (frame == 1) cadence = static_cast<int>(nums[2]);
    if (grouped.find(method) == grouped.end()) method_order.push_back(method);
    auto& fold = grouped[method][target];
    fold.target_id = target;
    if (static_cast<int>(fold.truth.size()) <= frame) {
      fold.truth.resize(frame + 1);
      fold.predicted.resize(frame + 1);
    }
    fold.truth[frame] = static_cast<int>(nums[3]);
    fold.predicted[frame] = static_cast<int>(nums[4]);
    if (nums[5] == 0.0) {
      if (fold.excluded_end == 0) fold.excluded_begin = frame;
      fold.excluded_begin = std::min(fold.excluded_begin, frame);
      fold.excluded_end = std::max(fold.excluded_end, frame + 1);
    }
  }

  std::vector<onda::EvalReport> reports;
  for (const std::string& method : method_order) {
    onda::EvalReport report;
    report.method = method;
    double acc = 0, prc = 0, rcl = 0;
    int n = 0;
    for (auto& [target, fold] : grouped[method]) {
      std::vector<int> truth, pred;
      for (std::size_t t = 0; t < fold.truth.size(); ++t) {
        const int frame = static_cast<int>(t);
        if (frame >= fold.excluded_begin && frame < fold.excluded_end) continue;
        truth.push_back(fold.truth[t]);
        pred.push_back(fold.predicted[t]);
      }
      fold.metrics = onda::compute_metrics(truth, pred);
      acc += fold.metrics.acc;
      prc += fold.metrics.prc;
      rcl += fold.metrics.rcl;
      ++n;
      report.folds.push_back(fold);
    }
    report.average = {acc / n, prc / n, rcl / n};
    reports.push_back(std::move(report));
  }
  onda::emit_report(reports, cadence, g.out_dir);
  std::cout << "report rebuilt in " << g.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-spectral features and online domain adaptation for "
               "streaming subject classification"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key=value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "generator seed override");
  app.add_option("--set", g.overrides, "config override key=value")->take_all();

  auto* synth = app.add_subcommand("synth", "generate synthetic subject streams");
  bool with_signals = false;
  synth->add_flag("--signals", with_signals, "also write vertex-level signals");

  auto* prep =
      app.add_subcommand("preprocess", "mask and compress raw frames");
  std::string frames_path, mask_path, prep_out, grid_out;
  int window = 5;
  prep->add_option("--frames", frames_path, "frame directory or combined CSV")
      ->required();
  prep->add_option("--mask", mask_path, "mask file (PGM or CSV)")->required();
  prep->add_option("--window", window, "odd moving-average window");
  prep->add_option("--out", prep_out, "output signals CSV")->required();
  prep->add_option("--grid-out", grid_out, "optional vertex coordinate CSV");

  auto* graph = app.add_subcommand("graph", "build and cache the graph basis");
  std::string graph_signals, graph_cache;
  graph->add_option("--signals", graph_signals, "signals CSV")->required();
  graph->add_option("--graph-cache", graph_cache, "output cache path")
      ->required();

  auto* feat = app.add_subcommand("features", "project signals onto the basis");
  std::string feat_signals, feat_cache, feat_out;
  feat->add_option("--signals", feat_signals, "signals CSV")->required();
  feat->add_option("--graph-cache", feat_cache, "graph cache")->required();
  feat->add_option("--out", feat_out, "output features CSV")->required();

  auto* fit =
      app.add_subcommand("fit", "online adaptation over a target stream");
  std::string fit_source, fit_target, fit_out = "report.csv";
  std::string save_state, load_state;
  int refresh_every = 0;
  fit->add_option("--source", fit_source, "labeled source features CSV");
  fit->add_option("--target", fit_target, "target features CSV")->required();
  fit->add_option("--refresh-every", refresh_every,
                  "frames per model refresh (default from config)");
  fit->add_option("--out", fit_out, "per-frame prediction CSV");
  fit->add_option("--save-state", save_state, "write a model checkpoint");
  fit->add_option("--load-state", load_state, "resume from a checkpoint");

  auto* bench = app.add_subcommand("bench", "run one comparison method");
  std::string bench_method, bench_source, bench_target, bench_out = "preds.csv";
  bench->add_option("--method", bench_method, "method name")->required();
  bench->add_option("--source", bench_source, "labeled source CSV")->required();
  bench->add_option("--target", bench_target, "target features CSV")
      ->required();
  bench->add_option("--out", bench_out, "output CSV");

  auto* tune = app.add_subcommand("tune", "grid search on source subjects");
  std::string tune_sources, tune_method = "proposed", tune_out;
  tune->add_option("--sources", tune_sources,
                   "comma-separated labeled feature CSVs (default: synth)");
  tune->add_option("--method", tune_method, "proposed or sa");
  tune->add_option("--out", tune_out, "write the tuned config here");

  auto* eval = app.add_subcommand("eval", "synthetic LOSO evaluation");
  std::string methods = "proposed,svm_offline,svm_online,sa_offline,sa_online";
  eval->add_option("--methods", methods, "comma-separated method list");

  auto* report = app.add_subcommand("report", "rebuild outputs from per-frame CSV");
  std::string per_frame_path;
  report->add_option("--per-frame", per_frame_path, "per_frame.csv from eval")
      ->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (*synth) return cmd_synth(g, with_signals);
    if (*prep)
      return cmd_preprocess(frames_path, mask_path, window, prep_out, grid_out);
    if (*graph) return cmd_graph(g, graph_signals, graph_cache);
    if (*feat) return cmd_features(g, feat_signals, feat_cache, feat_out);
    if (*fit)
      return cmd_fit(g, fit_source, fit_target, refresh_every, fit_out,
                     save_state, load_state);
    if (*bench)
      return cmd_bench(g, bench_method, bench_source, bench_target, bench_out);
    if (*tune) return cmd_tune(g, tune_sources, tune_method, tune_out);
    if (*eval) return cmd_eval(g, methods);
    if (*report) return cmd_report(g, per_frame_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
