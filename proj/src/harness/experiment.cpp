#include "bong/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bong/idx.hpp"
#include "bong/metrics.hpp"

namespace bong {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string dyn_name(DynamicsCfg::Kind k) {
  return k == DynamicsCfg::Kind::Static ? "static" : "random-walk";
}

DynamicsCfg::Kind parse_dyn(const std::string& s) {
  if (s == "static") return DynamicsCfg::Kind::Static;
  if (s == "random-walk") return DynamicsCfg::Kind::RandomWalk;
  throw InvalidConfig("unknown dynamics '" + s + "'");
}

void load_dataset(const RunConfig& cfg, Dataset& train, Dataset& test) {
  const std::uint64_t data_seed = derive_seed(cfg.seed, 1);
  const Index total = cfg.n_train + cfg.n_test;
  if (cfg.dataset == "synth-linreg" || cfg.dataset == "synth-nonlin") {
    Dataset all = cfg.dataset == "synth-linreg"
                      ? synth_linreg(cfg.synth_dim, total, cfg.synth_noise, data_seed)
                      : synth_nonlin(cfg.synth_dim, total, data_seed, cfg.synth_noise);
    train = all.slice(0, cfg.n_train);
    test = all.slice(cfg.n_train, cfg.n_test);
    return;
  }
  if (cfg.dataset.rfind("idx:", 0) == 0) {
    auto paths = split(cfg.dataset.substr(4), ',');
    if (paths.size() == 2) {
      Dataset all = load_idx(paths[0], paths[1], total);
      if (all.size() <= cfg.n_train)
        throw InvalidConfig("IDX file holds no records beyond the training prefix");
      train = all.slice(0, cfg.n_train);
      test = all.slice(cfg.n_train, all.size() - cfg.n_train);
    } else if (paths.size() == 4) {
      train = load_idx(paths[0], paths[1], cfg.n_train);
      test = load_idx(paths[2], paths[3], cfg.n_test);
    } else {
      throw InvalidConfig("idx dataset takes 2 or 4 comma-separated paths");
    }
    if (train.size() < cfg.n_train)
      throw InvalidConfig("IDX file has fewer records than --n-train");
    return;
  }
  throw InvalidConfig("unknown dataset '" + cfg.dataset + "'");
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::optional<double> parse_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw InvalidConfig("bad CSV number '" + s + "'");
  return v;
}

}  // namespace

void RunConfig::validate() const {
  if (n_train < 1) throw InvalidConfig("n_train must be >= 1");
  if (n_test < 1) throw InvalidConfig("n_test must be >= 1");
  if (eval_samples < 1) throw InvalidConfig("eval_samples must be >= 1");
  if (eval_every < 1) throw InvalidConfig("eval_every must be >= 1");
  if (!(sigma0_sq > 0)) throw InvalidConfig("sigma0 must be positive");
  if (synth_dim < 1) throw InvalidConfig("synthetic dimension must be >= 1");
  for (Index h : hidden)
    if (h < 1) throw InvalidConfig("hidden widths must be >= 1");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["algorithm"] = algorithm_name(c.alg.algorithm);
  j["family"] = c.alg.family.name();
  j["estimator"] = estimator_name(c.alg.est.kind);
  j["samples"] = c.alg.est.M;
  j["probes"] = c.alg.est.N;
  j["antithetic"] = c.alg.est.antithetic;
  j["obs_jitter"] = c.alg.est.obs_jitter;
  j["hessian_cap"] = c.alg.est.hessian_cap;
  j["lr"] = c.alg.lr;
  j["iters"] = c.alg.iters;
  j["rank"] = c.alg.rank;
  j["psd_jitter"] = c.alg.policy.jitter;
  j["clamp_variance"] = c.alg.policy.clamp_variance;
  j["dynamics"] = dyn_name(c.dyn.kind);
  j["gamma"] = c.dyn.gamma;
  j["q"] = c.dyn.q;
  j["dataset"] = c.dataset;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["seed"] = c.seed;
  j["sigma0"] = c.sigma0_sq;
  j["eval_every"] = c.eval_every;
  j["eval_samples"] = c.eval_samples;
  j["metrics"] = {{"plugin", c.eval_plugin}, {"mc", c.eval_mc}, {"lin", c.eval_lin}};
  j["hidden"] = c.hidden;
  j["activation"] = c.act == Activation::Tanh ? "tanh" : "relu";
  j["synth_dim"] = c.synth_dim;
  j["synth_noise"] = c.synth_noise;
  j["obs_var"] = c.obs_var;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.alg.algorithm = parse_algorithm(j.at("algorithm"));
  c.alg.family = FamilyTag::parse(j.at("family"));
  c.alg.est.kind = parse_estimator(j.at("estimator"));
  c.alg.est.M = j.at("samples");
  c.alg.est.N = j.at("probes");
  c.alg.est.antithetic = j.at("antithetic");
  c.alg.est.obs_jitter = j.at("obs_jitter");
  c.alg.est.hessian_cap = j.at("hessian_cap");
  c.alg.lr = j.at("lr");
  c.alg.iters = j.at("iters");
  c.alg.rank = j.at("rank");
  c.alg.policy.jitter = j.at("psd_jitter");
  c.alg.policy.clamp_variance = j.at("clamp_variance");
  c.dyn.kind = parse_dyn(j.at("dynamics"));
  c.dyn.gamma = j.at("gamma");
  c.dyn.q = j.at("q");
  c.dataset = j.at("dataset");
  c.n_train = j.at("n_train");
  c.n_test = j.at("n_test");
  c.seed = j.at("seed");
  c.sigma0_sq = j.at("sigma0");
  c.eval_every = j.at("eval_every");
  c.eval_samples = j.at("eval_samples");
  c.eval_plugin = j.at("metrics").at("plugin");
  c.eval_mc = j.at("metrics").at("mc");
  c.eval_lin = j.at("metrics").at("lin");
  c.hidden = j.at("hidden").get<std::vector<Index>>();
  c.act = j.at("activation") == "relu" ? Activation::Relu : Activation::Tanh;
  c.synth_dim = j.at("synth_dim");
  c.synth_noise = j.at("synth_noise");
  c.obs_var = j.at("obs_var");
  return c;
}

Experiment prepare(const RunConfig& cfg_in) {
  Experiment ex;
  ex.cfg = cfg_in;
  RunConfig& cfg = ex.cfg;
  cfg.validate();
  cfg.alg.normalize();
  load_dataset(cfg, ex.train, ex.test);

  const bool cls = ex.train.task == TaskKind::Classification;
  const Index C = ex.train.output_dim();
  std::vector<Index> layers{ex.train.input_dim()};
  layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
  layers.push_back(C);
  ex.pb.spec = MlpSpec{layers, cfg.act, true};
  if (cls) {
    ex.pb.model = ObsModel::categorical(C);
  } else {
    if (cfg.obs_var < 0) {
      const Mat& Y = ex.train.Y;
      const double var = (Y.colwise() - Y.rowwise().mean()).squaredNorm() /
                         double(std::max<Index>(1, Y.size() - Y.rows()));
      cfg.obs_var = var > 0 ? 0.1 * var : 1.0;
    }
    ex.pb.model = ObsModel::gaussian(Mat::Identity(C, C) * cfg.obs_var);
  }

  Rng init_rng(derive_seed(cfg.seed, 2));
  Vec mu0 = init_params(ex.pb.spec, init_rng);
  ex.prior = make_prior(cfg.alg.family, mu0, cfg.sigma0_sq, cfg.alg.rank);
  return ex;
}

Trace run_trace(const Experiment& ex, Belief* final_state) {
  const RunConfig& cfg = ex.cfg;
  const bool cls = ex.pb.model.is_classification();
  Trace trace;
  StreamOptions opts;
  opts.eval_every = std::size_t(cfg.eval_every);
  opts.hook = [&](std::size_t t, const Belief& state, std::int64_t wall_ns) {
    TraceRow row;
    row.t = t;
    row.wall_ns = wall_ns;
    auto run_mode = [&](PredMode mode, std::uint64_t sub, std::optional<double>& nlpd,
                        std::optional<double>& miscl) {
      Rng rng(derive_seed(cfg.seed, 4, t, sub));
      ModeMetrics m = evaluate(state, ex.pb, ex.test, mode, cfg.eval_samples, rng);
      nlpd = m.nlpd;
      if (cls) miscl = m.miscl;
    };
    if (cfg.eval_plugin) run_mode(PredMode::Plugin, 0, row.nlpd_plugin, row.miscl_plugin);
    if (cfg.eval_mc) run_mode(PredMode::MC, 1, row.nlpd_mc, row.miscl_mc);
    if (cfg.eval_lin) run_mode(PredMode::Linearized, 2, row.nlpd_lin, row.miscl_lin);
    trace.push_back(row);
  };
  StreamResult res = run_stream(ex.prior, cfg.dyn, ex.train.X, ex.train.Y, ex.pb, cfg.alg,
                                derive_seed(cfg.seed, 3), opts);
  if (final_state) *final_state = res.state;
  return trace;
}

std::string format_csv(const Trace& trace) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : trace) {
    out += std::to_string(r.t) + "," + fmt(r.nlpd_plugin) + "," + fmt(r.nlpd_mc) + "," +
           fmt(r.nlpd_lin) + "," + fmt(r.miscl_plugin) + "," + fmt(r.miscl_mc) + "," +
           fmt(r.miscl_lin) + "," + std::to_string(r.wall_ns) + "\n";
  }
  return out;
}

Trace parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InvalidConfig("unexpected CSV header");
  Trace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 8) throw InvalidConfig("CSV row must have 8 fields");
    TraceRow r;
    r.t = std::stoull(f[0]);
    r.nlpd_plugin = parse_field(f[1]);
    r.nlpd_mc = parse_field(f[2]);
    r.nlpd_lin = parse_field(f[3]);
    r.miscl_plugin = parse_field(f[4]);
    r.miscl_mc = parse_field(f[5]);
    r.miscl_lin = parse_field(f[6]);
    r.wall_ns = std::stoll(f[7]);
    trace.push_back(r);
  }
  return trace;
}

Trace run_experiment(const RunConfig& cfg, const std::string& out_path) {
  Experiment ex = prepare(cfg);
  Trace trace = run_trace(ex);
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot write " + out_path);
    out << format_csv(trace);
  }
  std::ofstream js(out_path + ".json");
  if (!js) throw Error("IoError", "cannot write " + out_path + ".json");
  js << to_json(ex.cfg).dump(2) << "\n";
  return trace;
}

}  // namespace bong
