#pragma once

#include <string>
#include <vector>

#include "onda/harness.hpp"
#include "onda/synth.hpp"

namespace onda {

/// Everything a run needs, addressable through a flat key=value file.
/// Unknown keys are rejected.
struct RunConfig {
  Hyperparams hp;
  SynthConfig synth;
  SvmOptions svm;
  int refresh_every = 6;
  int sa_dim = 10;
  int init_iters = 2000;
  TuningGrid grid;  // defaults to the standard lambda1/lambda2 sweep
  std::vector<int> sa_dim_grid{2, 5, 10, 20, 50};

  HarnessConfig harness() const {
    return {hp, svm, sa_dim, refresh_every, init_iters};
  }
};

RunConfig default_run_config();

/// Apply one `key=value` assignment; throws ParameterError on unknown keys or
/// malformed values.
void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value);

/// Flat key=value file with '#' comments and blank lines.
RunConfig load_run_config(const std::string& path);

/// The full key list, for diagnostics and docs.
std::vector<std::string> config_keys();

void save_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace onda
