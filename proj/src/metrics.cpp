#include "onda/metrics.hpp"

#include <limits>

namespace onda {

Metrics compute_metrics(const std::vector<int>& truth,
                        const std::vector<int>& predicted) {
  if (truth.empty()) throw ParameterError("compute_metrics: empty input");
  if (truth.size() != predicted.size()) {
    throw DataError("compute_metrics: length mismatch");
  }
  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if ((t != 1 && t != -1) || (p != 1 && p != -1)) {
      throw DataError("compute_metrics: labels must be +1 or -1");
    }
    if (t == 1) {
      (p == 1 ? tp : fn) += 1;
    } else {
      (p == -1 ? tn : fp) += 1;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Metrics m;
  m.acc = static_cast<double>(tp + tn) / static_cast<double>(truth.size());
  m.prc = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : nan;
  m.rcl = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : nan;
  return m;
}

}  // namespace onda
