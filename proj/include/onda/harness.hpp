#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "onda/bench.hpp"
#include "onda/metrics.hpp"
#include "onda/optim.hpp"
#include "onda/synth.hpp"

namespace onda {

/// One single-source streaming run: given a labeled source stream, emit one
/// +-1 prediction per target frame. Online implementations must only use
/// target rows up to the frame being predicted; the offline baselines may use
/// them all.
class StreamClassifier {
 public:
  virtual ~StreamClassifier() = default;
  virtual std::vector<int> run(const SubjectStream& source,
                               const Matrix& target_features) = 0;
};

using ClassifierFactory = std::function<std::unique_ptr<StreamClassifier>()>;

struct HarnessConfig {
  Hyperparams hp;       // proposed method
  SvmOptions svm;       // benchmark SVMs
  int sa_dim = 10;      // alignment benchmarks
  int refresh_every = 6;
  int init_iters = 2000;  // iteration cap for the offline source-only fit
};

/// Factory for a method by name: proposed, svm_offline, svm_online,
/// sa_offline, sa_online.
ClassifierFactory make_method(const std::string& name, const HarnessConfig& cfg);

/// Source-side training rows: features and labels of the scored frames only
/// (the transition window is dropped from training as well as scoring).
std::pair<Matrix, Vector> source_training_data(const SubjectStream& stream);

struct FoldResult {
  int target_id = 0;
  std::vector<int> truth;      // every frame
  std::vector<int> predicted;  // majority-voted, every frame
  int excluded_begin = 0;
  int excluded_end = 0;
  Metrics metrics;             // over scored frames
  bool failed = false;
  std::string error;
};

struct EvalReport {
  std::string method;
  std::vector<FoldResult> folds;
  Metrics average;  // arithmetic mean over folds; NaN propagates
};

/// Leave-one-subject-out evaluation: each subject in turn is the streaming
/// target, every other subject runs as a single source, and per-frame votes
/// are combined by strict majority.
EvalReport loso_evaluate(const std::vector<SubjectStream>& streams,
                         const ClassifierFactory& factory,
                         const std::string& method_name);

struct TuningGrid {
  std::vector<double> lambda1;
  std::vector<double> lambda2;
};

/// Grid defaults sweeping lambda1 in 20..200 and lambda2 in 0.002..0.020.
TuningGrid default_tuning_grid();

/// Leave-one-out tuning over the source subjects only: the cell with the
/// best mean fold accuracy wins, ties resolving to the smaller lambda1 then
/// lambda2.
std::pair<double, double> tune(const std::vector<SubjectStream>& sources,
                               const TuningGrid& grid,
                               const HarnessConfig& base);

/// Same protocol for the subspace-alignment dimension.
int tune_sa_dim(const std::vector<SubjectStream>& sources,
                const std::vector<int>& dims, const HarnessConfig& base);

}  // namespace onda
