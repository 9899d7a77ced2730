#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bong/checks.hpp"
#include "bong/experiment.hpp"
#include "bong/tuning.hpp"

using namespace bong;

namespace {

struct Args {
  std::string algorithm = "bong", family = "fc", estimator = "lin-hess", dynamics = "static";
  std::string out = "trace.csv", metrics = "plugin,mc,lin", activation = "tanh", tune_at = "final";
  std::vector<double> lr_grid, sigma0_grid;
  bool serial = false;
};

void add_run_options(CLI::App* app, RunConfig& c, Args& a) {
  app->add_option("--algorithm", a.algorithm, "bong|blr|bog|bbb")->capture_default_str();
  app->add_option("--family", a.family, "fc|fc_mom|diag|diag_mom|dlr")->capture_default_str();
  app->add_option("--estimator", a.estimator, "mc-hess|mc-ef|lin-hess|lin-ef")
      ->capture_default_str();
  app->add_option("--rank", c.alg.rank, "DLR rank")->capture_default_str();
  app->add_option("--samples", c.alg.est.M, "MC samples M")->capture_default_str();
  app->add_option("--probes", c.alg.est.N, "Hutchinson probes (0 = 10 M)")->capture_default_str();
  app->add_flag("--antithetic", c.alg.est.antithetic, "draw MC samples in mirrored pairs");
  app->add_option("--iters", c.alg.iters, "inner iterations I")->capture_default_str();
  app->add_option("--lr", c.alg.lr, "learning rate")->capture_default_str();
  app->add_option("--dataset", c.dataset,
                  "synth-linreg|synth-nonlin|idx:<img>,<lbl>[,<test img>,<test lbl>]")
      ->capture_default_str();
  app->add_option("--n-train", c.n_train, "training prefix T")->capture_default_str();
  app->add_option("--n-test", c.n_test, "test records")->capture_default_str();
  app->add_option("--seed", c.seed)->capture_default_str();
  app->add_option("--sigma0", c.sigma0_sq, "prior variance")->capture_default_str();
  app->add_option("--eval-every", c.eval_every, "evaluation cadence K")->capture_default_str();
  app->add_option("--eval-samples", c.eval_samples, "posterior samples S")->capture_default_str();
  app->add_option("--metrics", a.metrics, "subset of plugin,mc,lin")->capture_default_str();
  app->add_option("--hidden", c.hidden, "hidden layer widths")->delimiter(',');
  app->add_option("--activation", a.activation, "tanh|relu")->capture_default_str();
  app->add_option("--dim", c.synth_dim, "synthetic input dimension")->capture_default_str();
  app->add_option("--noise", c.synth_noise, "synthetic noise std")->capture_default_str();
  app->add_option("--obs-var", c.obs_var, "Gaussian R (negative = 0.1 Var(y_train))")->capture_default_str();
  app->add_option("--obs-jitter", c.alg.est.obs_jitter, "R^-1 jitter (negative = default)");
  app->add_option("--psd-jitter", c.alg.policy.jitter, "repair jitter for invalid states");
  app->add_flag("--clamp-variance", c.alg.policy.clamp_variance, "floor invalid variances");
  app->add_option("--dynamics", a.dynamics, "static|random-walk")->capture_default_str();
  app->add_option("--gamma", c.dyn.gamma)->capture_default_str();
  app->add_option("--q", c.dyn.q)->capture_default_str();
  app->add_flag("--serial", a.serial, "use the serial reference kernels");
  app->add_option("--out", a.out, "CSV output path")->capture_default_str();
}

void resolve(RunConfig& c, const Args& a) {
  c.alg.algorithm = parse_algorithm(a.algorithm);
  c.alg.family = FamilyTag::parse(a.family);
  c.alg.est.kind = parse_estimator(a.estimator);
  if (a.dynamics == "static") {
    c.dyn.kind = DynamicsCfg::Kind::Static;
  } else if (a.dynamics == "random-walk") {
    c.dyn.kind = DynamicsCfg::Kind::RandomWalk;
  } else {
    throw InvalidConfig("unknown dynamics '" + a.dynamics + "'");
  }
  if (a.activation == "tanh") {
    c.act = Activation::Tanh;
  } else if (a.activation == "relu") {
    c.act = Activation::Relu;
  } else {
    throw InvalidConfig("unknown activation '" + a.activation + "'");
  }
  c.eval_plugin = c.eval_mc = c.eval_lin = false;
  std::stringstream ss(a.metrics);
  std::string m;
  while (std::getline(ss, m, ',')) {
    if (m == "plugin") c.eval_plugin = true;
    else if (m == "mc") c.eval_mc = true;
    else if (m == "lin") c.eval_lin = true;
    else throw InvalidConfig("unknown metric '" + m + "'");
  }
  set_default_exec(a.serial ? Exec::Serial : Exec::Parallel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian online natural gradient and its comparison grid"};
  app.require_subcommand(1);

  RunConfig cfg;
  Args args;
  auto* run = app.add_subcommand("run", "stream a dataset and write a metric trace");
  add_run_options(run, cfg, args);

  RunConfig tcfg;
  Args targs;
  auto* tune = app.add_subcommand("tune", "grid-search the learning rate on a validation split");
  add_run_options(tune, tcfg, targs);
  tune->add_option("--lr-grid", targs.lr_grid, "learning rates")->delimiter(',')->required();
  tune->add_option("--sigma0-grid", targs.sigma0_grid, "prior variances")->delimiter(',');
  tune->add_option("--tune-at", targs.tune_at, "final|mid")->capture_default_str();

  checks::CheckOptions copts;
  auto* self = app.add_subcommand("selftest", "run the oracle suite");
  self->add_option("--scratch", copts.scratch_dir, "directory for temporary traces")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      resolve(cfg, args);
      Trace t = run_experiment(cfg, args.out);
      std::fprintf(stderr, "wrote %zu rows to %s\n", t.size(), args.out.c_str());
    } else if (*tune) {
      resolve(tcfg, targs);
      if (targs.tune_at != "final" && targs.tune_at != "mid")
        throw InvalidConfig("--tune-at must be final or mid");
      TuneResult res = tune_learning_rate(tcfg, targs.lr_grid, targs.sigma0_grid,
                                          targs.tune_at == "mid" ? TuneAt::Mid : TuneAt::Final);
      nlohmann::json j;
      j["best_lr"] = res.best_lr;
      j["best_sigma0"] = res.best_sigma0_sq;
      for (const auto& tr : res.trials)
        j["trials"].push_back({{"lr", tr.lr},
                               {"sigma0", tr.sigma0_sq},
                               {"score", std::isfinite(tr.score) ? nlohmann::json(tr.score)
                                                                 : nlohmann::json(nullptr)}});
      std::cout << j.dump(2) << "\n";
      if (tune->count("--out")) {
        std::ofstream(targs.out) << j.dump(2) << "\n";
      }
    } else if (*self) {
      bool all = true;
      for (int id : checks::selftest_ids()) {
        auto r = checks::run_check(id, copts);
        std::cout << checks::format_line(r) << std::endl;
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
