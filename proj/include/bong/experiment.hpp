#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bong/dataset.hpp"
#include "bong/updaters.hpp"

namespace bong {

struct RunConfig {
  AlgorithmCfg alg;
  DynamicsCfg dyn;
  // synth-linreg | synth-nonlin | idx:<img>,<lbl>[,<test img>,<test lbl>]
  std::string dataset = "synth-linreg";
  Index n_train = 2000;
  Index n_test = 500;
  std::uint64_t seed = 0;
  double sigma0_sq = 1.0;
  Index eval_every = 10;
  Index eval_samples = 100;
  bool eval_plugin = true;
  bool eval_mc = true;
  bool eval_lin = true;

  // Predictor. Hidden widths empty means a linear predictor.
  std::vector<Index> hidden;
  Activation act = Activation::Tanh;
  Index synth_dim = 10;
  double synth_noise = 0.1;
  double obs_var = -1.0;  // Gaussian R; negative resolves to 0.1 Var(y_train)

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

// Everything a run needs, resolved from a RunConfig.
struct Experiment {
  RunConfig cfg;  // resolved: normalized algorithm, concrete obs_var
  Dataset train;
  Dataset test;
  Problem pb;
  Belief prior;
};

Experiment prepare(const RunConfig& cfg);

struct TraceRow {
  std::size_t t = 0;
  std::optional<double> nlpd_plugin, nlpd_mc, nlpd_lin;
  std::optional<double> miscl_plugin, miscl_mc, miscl_lin;
  std::int64_t wall_ns = 0;  // update time of step t
};

using Trace = std::vector<TraceRow>;

// Streams the training prefix; evaluates on the test set every eval_every
// steps and at the last step.
Trace run_trace(const Experiment& ex, Belief* final_state = nullptr);

inline constexpr const char* kCsvHeader =
    "t,nlpd_plugin,nlpd_mc,nlpd_lin,miscl_plugin,miscl_mc,miscl_lin,wall_ns";

std::string format_csv(const Trace& trace);
Trace parse_csv(const std::string& text);

// Runs the experiment and writes <out> (CSV) plus <out>.json (resolved config).
Trace run_experiment(const RunConfig& cfg, const std::string& out_path);

}  // namespace bong
