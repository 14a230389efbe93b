#pragma once

#include <vector>

#include "onda/common.hpp"

namespace onda {

/// Accuracy, precision, recall with +1 as the positive class. Precision is
/// NaN when nothing was predicted positive; recall is NaN when nothing was
/// actually positive.
struct Metrics {
  double acc = 0.0;
  double prc = 0.0;
  double rcl = 0.0;
};

Metrics compute_metrics(const std::vector<int>& truth,
                        const std::vector<int>& predicted);

}  // namespace onda
