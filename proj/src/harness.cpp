#include "onda/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace onda {

namespace {

class ProposedClassifier : public StreamClassifier {
 public:
  explicit ProposedClassifier(const HarnessConfig& cfg) : cfg_(cfg) {}

  std::vector<int> run(const SubjectStream& source,
                       const Matrix& target_features) override {
    auto [xs, ys] = source_training_data(source);
    Hyperparams hp = cfg_.hp;
    hp.m = std::min(hp.m, static_cast<int>(xs.rows()));
    DaState state = make_state(xs, ys, hp);
    // The source-only fit happens before the stream starts and is not bound
    // by the per-refresh iteration budget; run it to convergence.
    state.hp.iters = std::max(cfg_.hp.iters, cfg_.init_iters);
    fit_epoch(state);
    state.hp.iters = cfg_.hp.iters;
    DecisionCache cache = make_decision_cache(state);

    const int frames = static_cast<int>(target_features.rows());
    const int refresh = std::max(1, cfg_.refresh_every);
    std::vector<int> preds(frames);
    for (int t = 0; t < frames; ++t) {
      if (t > 0 && t % refresh == 0) {
        advance_time(state, target_features.middleRows(t - refresh, refresh));
        fit_epoch(state);
        cache = make_decision_cache(state);
      }
      preds[t] =
          predict_cached(state, cache, target_features.row(t).transpose()).label;
    }
    return preds;
  }

 private:
  HarnessConfig cfg_;
};

class SvmOfflineClassifier : public StreamClassifier {
 public:
  explicit SvmOfflineClassifier(const HarnessConfig& cfg) : cfg_(cfg) {}
  std::vector<int> run(const SubjectStream& source,
                       const Matrix& target_features) override {
    auto [xs, ys] = source_training_data(source);
    return svm_offline(xs, ys, target_features, cfg_.svm);
  }

 private:
  HarnessConfig cfg_;
};

class SvmOnlineClassifier : public StreamClassifier {
 public:
  explicit SvmOnlineClassifier(const HarnessConfig& cfg) : cfg_(cfg) {}
  std::vector<int> run(const SubjectStream& source,
                       const Matrix& target_features) override {
    auto [xs, ys] = source_training_data(source);
    return svm_online(xs, ys, target_features, cfg_.svm);
  }

 private:
  HarnessConfig cfg_;
};

class SaOfflineClassifier : public StreamClassifier {
 public:
  explicit SaOfflineClassifier(const HarnessConfig& cfg) : cfg_(cfg) {}
  std::vector<int> run(const SubjectStream& source,
                       const Matrix& target_features) override {
    auto [xs, ys] = source_training_data(source);
    return sa_offline(xs, ys, target_features, cfg_.sa_dim, cfg_.svm);
  }

 private:
  HarnessConfig cfg_;
};

class SaOnlineClassifier : public StreamClassifier {
 public:
  explicit SaOnlineClassifier(const HarnessConfig& cfg) : cfg_(cfg) {}
  std::vector<int> run(const SubjectStream& source,
                       const Matrix& target_features) override {
    auto [xs, ys] = source_training_data(source);
    return sa_online(xs, ys, target_features, cfg_.sa_dim, cfg_.svm);
  }

 private:
  HarnessConfig cfg_;
};

Metrics scored_metrics(const FoldResult& fold) {
  std::vector<int> truth, pred;
  for (std::size_t i = 0; i < fold.truth.size(); ++i) {
    const int frame = static_cast<int>(i);
    if (frame >= fold.excluded_begin && frame < fold.excluded_end) continue;
    truth.push_back(fold.truth[i]);
    pred.push_back(fold.predicted[i]);
  }
  return compute_metrics(truth, pred);
}

double mean_fold_accuracy(const EvalReport& report) {
  double sum = 0.0;
  int n = 0;
  for (const FoldResult& fold : report.folds) {
    if (fold.failed) continue;
    sum += fold.metrics.acc;
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

ClassifierFactory make_method(const std::string& name,
                              const HarnessConfig& cfg) {
  if (name == "proposed") {
    return [cfg] { return std::make_unique<ProposedClassifier>(cfg); };
  }
  if (name == "svm_offline") {
    return [cfg] { return std::make_unique<SvmOfflineClassifier>(cfg); };
  }
  if (name == "svm_online") {
    return [cfg] { return std::make_unique<SvmOnlineClassifier>(cfg); };
  }
  if (name == "sa_offline") {
    return [cfg] { return std::make_unique<SaOfflineClassifier>(cfg); };
  }
  if (name == "sa_online") {
    return [cfg] { return std::make_unique<SaOnlineClassifier>(cfg); };
  }
  throw ParameterError("unknown method: " + name);
}

std::pair<Matrix, Vector> source_training_data(const SubjectStream& stream) {
  std::vector<int> pos, neg;
  for (int t = 0; t < stream.frames(); ++t) {
    if (!stream.scored(t)) continue;
    (stream.labels[t] == 1 ? pos : neg).push_back(t);
  }
  // Balance the classes by thinning the majority deterministically; an
  // intercept trained on the raw 5h/13h imbalance otherwise swamps the
  // attenuated cross-subject kernel responses.
  auto thin = [](std::vector<int>& v, std::size_t keep) {
    if (v.size() <= keep) return;
    std::vector<int> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      out.push_back(v[i * v.size() / keep]);
    }
    v = std::move(out);
  };
  const std::size_t keep = std::min(pos.size(), neg.size());
  thin(pos, keep);
  thin(neg, keep);

  std::vector<int> rows = pos;
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::sort(rows.begin(), rows.end());
  if (rows.size() < 2) {
    throw DataError("source_training_data: too few scored frames");
  }
  Matrix x(rows.size(), stream.features.cols());
  Vector y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(i) = stream.features.row(rows[i]);
    y(i) = stream.labels[rows[i]];
  }
  return {std::move(x), std::move(y)};
}

EvalReport loso_evaluate(const std::vector<SubjectStream>& streams,
                         const ClassifierFactory& factory,
                         const std::string& method_name) {
  if (streams.size() < 2) {
    throw ParameterError("loso_evaluate: need at least 2 subjects");
  }
  EvalReport report;
  report.method = method_name;

  for (std::size_t target = 0; target < streams.size(); ++target) {
    const SubjectStream& tgt = streams[target];
    FoldResult fold;
    fold.target_id = tgt.subject_id;
    fold.truth = tgt.labels;
    fold.excluded_begin = tgt.excluded_begin;
    fold.excluded_end = tgt.excluded_end;
    try {
      std::vector<std::vector<int>> per_source;
      for (std::size_t src = 0; src < streams.size(); ++src) {
        if (src == target) continue;
        per_source.push_back(factory()->run(streams[src], tgt.features));
      }
      fold.predicted.resize(tgt.frames());
      std::vector<int> votes(per_source.size());
      for (int t = 0; t < tgt.frames(); ++t) {
        for (std::size_t s = 0; s < per_source.size(); ++s) {
          votes[s] = per_source[s][t];
        }
        fold.predicted[t] = majority_vote(votes);
      }
      fold.metrics = scored_metrics(fold);
    } catch (const std::exception& e) {
      fold.failed = true;
      fold.error = e.what();
    }
    report.folds.push_back(std::move(fold));
  }

  double acc = 0.0, prc = 0.0, rcl = 0.0;
  int n = 0;
  for (const FoldResult& fold : report.folds) {
    if (fold.failed) continue;
    acc += fold.metrics.acc;
    prc += fold.metrics.prc;
    rcl += fold.metrics.rcl;
    ++n;
  }
  if (n > 0) {
    report.average = {acc / n, prc / n, rcl / n};
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.average = {nan, nan, nan};
  }
  return report;
}

TuningGrid default_tuning_grid() {
  TuningGrid grid;
  for (int i = 1; i <= 10; ++i) grid.lambda1.push_back(20.0 * i);
  for (int i = 1; i <= 10; ++i) grid.lambda2.push_back(0.002 * i);
  return grid;
}

std::pair<double, double> tune(const std::vector<SubjectStream>& sources,
                               const TuningGrid& grid,
                               const HarnessConfig& base) {
  if (sources.size() < 2) {
    throw ParameterError("tune: need at least 2 source subjects");
  }
  if (grid.lambda1.empty() || grid.lambda2.empty()) {
    throw ParameterError("tune: empty grid");
  }
  // Ascending sweep so strict improvement leaves ties on the smallest cell.
  std::vector<double> l1s = grid.lambda1;
  std::vector<double> l2s = grid.lambda2;
  std::sort(l1s.begin(), l1s.end());
  std::sort(l2s.begin(), l2s.end());
  double best_acc = -1.0;
  std::pair<double, double> best{l1s.front(), l2s.front()};
  for (double l1 : l1s) {
    for (double l2 : l2s) {
      HarnessConfig cfg = base;
      cfg.hp.lambda1 = l1;
      cfg.hp.lambda2 = l2;
      const EvalReport report =
          loso_evaluate(sources, make_method("proposed", cfg), "proposed");
      const double acc = mean_fold_accuracy(report);
      if (acc > best_acc) {
        best_acc = acc;
        best = {l1, l2};
      }
    }
  }
  return best;
}

int tune_sa_dim(const std::vector<SubjectStream>& sources,
                const std::vector<int>& dims, const HarnessConfig& base) {
  if (sources.size() < 2) {
    throw ParameterError("tune_sa_dim: need at least 2 source subjects");
  }
  if (dims.empty()) throw ParameterError("tune_sa_dim: empty grid");
  std::vector<int> sorted_dims = dims;
  std::sort(sorted_dims.begin(), sorted_dims.end());
  double best_acc = -1.0;
  int best = sorted_dims.front();
  for (int d : sorted_dims) {
    HarnessConfig cfg = base;
    cfg.sa_dim = d;
    const EvalReport report =
        loso_evaluate(sources, make_method("sa_online", cfg), "sa_online");
    const double acc = mean_fold_accuracy(report);
    if (acc > best_acc) {
      best_acc = acc;
      best = d;
    }
  }
  return best;
}

}  // namespace onda
