#include "onda/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace onda {

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config: bad numeric value for " + key + ": '" +
                         value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ParameterError("config: " + key + " must be an integer");
  }
  return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config: bad unsigned value for " + key);
  }
}

std::vector<double> to_double_list(const std::string& key,
                                   const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ParameterError("config: empty list for " + key);
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (double v : to_double_list(key, value)) out.push_back(static_cast<int>(v));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& registry() {
  static const std::map<std::string, Setter> reg = {
      // classifier / optimizer
      {"lambda", [](RunConfig& c, const std::string& v) { c.hp.lambda = to_double("lambda", v); }},
      {"lambda1", [](RunConfig& c, const std::string& v) { c.hp.lambda1 = to_double("lambda1", v); }},
      {"lambda2", [](RunConfig& c, const std::string& v) { c.hp.lambda2 = to_double("lambda2", v); }},
      {"r", [](RunConfig& c, const std::string& v) { c.hp.r = to_int("r", v); }},
      {"m", [](RunConfig& c, const std::string& v) { c.hp.m = to_int("m", v); }},
      {"L1", [](RunConfig& c, const std::string& v) { c.hp.l1 = to_double("L1", v); }},
      {"L2", [](RunConfig& c, const std::string& v) { c.hp.l2 = to_double("L2", v); }},
      {"w1", [](RunConfig& c, const std::string& v) { c.hp.w1 = to_double("w1", v); }},
      {"w2", [](RunConfig& c, const std::string& v) { c.hp.w2 = to_double("w2", v); }},
      {"iters", [](RunConfig& c, const std::string& v) { c.hp.iters = to_int("iters", v); }},
      {"tol", [](RunConfig& c, const std::string& v) { c.hp.tol = to_double("tol", v); }},
      {"delta", [](RunConfig& c, const std::string& v) {
         c.hp.delta = to_double("delta", v);
         c.svm.delta = c.hp.delta;
       }},
      {"gamma", [](RunConfig& c, const std::string& v) {
         c.hp.gamma = to_double("gamma", v);
         c.svm.gamma = c.hp.gamma;
       }},
      // stream protocol
      {"refresh_every", [](RunConfig& c, const std::string& v) { c.refresh_every = to_int("refresh_every", v); }},
      {"sa_dim", [](RunConfig& c, const std::string& v) { c.sa_dim = to_int("sa_dim", v); }},
      {"init_iters", [](RunConfig& c, const std::string& v) { c.init_iters = to_int("init_iters", v); }},
      {"svm_iters", [](RunConfig& c, const std::string& v) { c.svm.max_iters = to_int("svm_iters", v); }},
      {"lambda1_grid", [](RunConfig& c, const std::string& v) { c.grid.lambda1 = to_double_list("lambda1_grid", v); }},
      {"lambda2_grid", [](RunConfig& c, const std::string& v) { c.grid.lambda2 = to_double_list("lambda2_grid", v); }},
      {"sa_dim_grid", [](RunConfig& c, const std::string& v) { c.sa_dim_grid = to_int_list("sa_dim_grid", v); }},
      // generator
      {"n_subjects", [](RunConfig& c, const std::string& v) { c.synth.n_subjects = to_int("n_subjects", v); }},
      {"frames_per_subject", [](RunConfig& c, const std::string& v) { c.synth.frames_per_subject = to_int("frames_per_subject", v); }},
      {"grid_m", [](RunConfig& c, const std::string& v) { c.synth.grid_m = to_int("grid_m", v); }},
      {"transition_frame", [](RunConfig& c, const std::string& v) { c.synth.transition_frame = to_int("transition_frame", v); }},
      {"excl_halfwidth", [](RunConfig& c, const std::string& v) { c.synth.excl_halfwidth = to_int("excl_halfwidth", v); }},
      {"cadence_minutes", [](RunConfig& c, const std::string& v) { c.synth.cadence_minutes = to_int("cadence_minutes", v); }},
      {"noise", [](RunConfig& c, const std::string& v) { c.synth.noise = to_double("noise", v); }},
      {"level_shift", [](RunConfig& c, const std::string& v) { c.synth.level_shift = to_double("level_shift", v); }},
      {"scale_spread", [](RunConfig& c, const std::string& v) { c.synth.scale_spread = to_double("scale_spread", v); }},
      {"rotation_spread", [](RunConfig& c, const std::string& v) { c.synth.rotation_spread = to_double("rotation_spread", v); }},
      {"base_temp", [](RunConfig& c, const std::string& v) { c.synth.base_temp = to_double("base_temp", v); }},
      {"amp_viable", [](RunConfig& c, const std::string& v) { c.synth.amp_viable = to_double("amp_viable", v); }},
      {"amp_unviable", [](RunConfig& c, const std::string& v) { c.synth.amp_unviable = to_double("amp_unviable", v); }},
      {"cooling_drop", [](RunConfig& c, const std::string& v) { c.synth.cooling_drop = to_double("cooling_drop", v); }},
      {"n_patterns", [](RunConfig& c, const std::string& v) { c.synth.n_patterns = to_int("n_patterns", v); }},
      {"feature_dim", [](RunConfig& c, const std::string& v) { c.synth.feature_dim = to_int("feature_dim", v); }},
      {"avg_window", [](RunConfig& c, const std::string& v) { c.synth.avg_window = to_int("avg_window", v); }},
      {"sigma", [](RunConfig& c, const std::string& v) { c.synth.sigma = to_double("sigma", v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.synth.seed = to_u64("seed", v); }},
  };
  return reg;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.hp.lambda1 = 20.0;
  cfg.hp.lambda2 = 0.002;
  // The comparison SVMs carry their own, much lighter ridge: the shared
  // lambda = 1 of the joint objective acts on the factored coefficients,
  // whereas here it multiplies the full kernel quadratic form.
  cfg.svm.lambda = 0.01;
  cfg.grid = default_tuning_grid();
  return cfg;
}

void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  const auto& reg = registry();
  const auto it = reg.find(key);
  if (it == reg.end()) throw ParameterError("config: unknown key '" + key + "'");
  it->second(cfg, value);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file: " + path);
  RunConfig cfg = default_run_config();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config: line " + std::to_string(line_no) +
                           " is not key=value");
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    set_config_value(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, setter] : registry()) keys.push_back(key);
  return keys;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config file: " + path);
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "lambda=" << num(cfg.hp.lambda) << '\n';
  out << "lambda1=" << num(cfg.hp.lambda1) << '\n';
  out << "lambda2=" << num(cfg.hp.lambda2) << '\n';
  out << "r=" << cfg.hp.r << '\n';
  out << "m=" << cfg.hp.m << '\n';
  out << "L1=" << num(cfg.hp.l1) << '\n';
  out << "L2=" << num(cfg.hp.l2) << '\n';
  out << "w1=" << num(cfg.hp.w1) << '\n';
  out << "w2=" << num(cfg.hp.w2) << '\n';
  out << "iters=" << cfg.hp.iters << '\n';
  out << "tol=" << num(cfg.hp.tol) << '\n';
  out << "delta=" << num(cfg.hp.delta) << '\n';
  out << "gamma=" << num(cfg.hp.gamma) << '\n';
  out << "refresh_every=" << cfg.refresh_every << '\n';
  out << "sa_dim=" << cfg.sa_dim << '\n';
  out << "init_iters=" << cfg.init_iters << '\n';
  out << "svm_iters=" << cfg.svm.max_iters << '\n';
  out << "n_subjects=" << cfg.synth.n_subjects << '\n';
  out << "frames_per_subject=" << cfg.synth.frames_per_subject << '\n';
  out << "grid_m=" << cfg.synth.grid_m << '\n';
  out << "transition_frame=" << cfg.synth.transition_frame << '\n';
  out << "excl_halfwidth=" << cfg.synth.excl_halfwidth << '\n';
  out << "cadence_minutes=" << cfg.synth.cadence_minutes << '\n';
  out << "noise=" << num(cfg.synth.noise) << '\n';
  out << "level_shift=" << num(cfg.synth.level_shift) << '\n';
  out << "scale_spread=" << num(cfg.synth.scale_spread) << '\n';
  out << "rotation_spread=" << num(cfg.synth.rotation_spread) << '\n';
  out << "base_temp=" << num(cfg.synth.base_temp) << '\n';
  out << "amp_viable=" << num(cfg.synth.amp_viable) << '\n';
  out << "amp_unviable=" << num(cfg.synth.amp_unviable) << '\n';
  out << "cooling_drop=" << num(cfg.synth.cooling_drop) << '\n';
  out << "n_patterns=" << cfg.synth.n_patterns << '\n';
  out << "feature_dim=" << cfg.synth.feature_dim << '\n';
  out << "avg_window=" << cfg.synth.avg_window << '\n';
  out << "sigma=" << num(cfg.synth.sigma) << '\n';
  out << "seed=" << cfg.synth.seed << '\n';
}

}  // namespace onda
