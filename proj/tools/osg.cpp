#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deeposg/config.hpp"
#include "deeposg/error.hpp"
#include "deeposg/pipeline.hpp"
#include "deeposg/rng.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace deeposg;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct Options {
  std::string config;
  std::string out_dir;
  std::string dataset;
  std::string model;
  std::vector<std::string> methods;
  std::vector<std::string> seed_overrides;
  bool plots = false;
  bool oracle = false;
};

/// Exclusive marker file held while a command writes into the run directory.
class DirLock {
public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) throw IoError(path_.string(), "run directory is locked by another process");
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) {
      ::close(fd_);
      fs::remove(path_);
      throw IoError(path_.string(), "cannot write lock file");
    }
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

private:
  fs::path path_;
  int fd_ = -1;
};

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("--seed-override: bad seed '" + text + "'");
  return v;
}

void apply_seed_override(ExperimentConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    const std::uint64_t s = parse_seed(spec);
    cfg.seeds = SeedSet{s, s + 1, s + 2, s + 3, s + 4};
    return;
  }
  const std::string name = spec.substr(0, eq);
  const std::uint64_t s = parse_seed(spec.substr(eq + 1));
  if (name == "dataset") cfg.seeds.dataset = s;
  else if (name == "init") cfg.seeds.init = s;
  else if (name == "tuples") cfg.seeds.tuples = s;
  else if (name == "split") cfg.seeds.split = s;
  else if (name == "partition") cfg.seeds.partition = s;
  else throw ConfigError("--seed-override: unknown seed '" + name + "'");
}

ExperimentConfig load(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  for (const auto& s : opt.seed_overrides) apply_seed_override(cfg, s);
  return cfg;
}

fs::path out_dir(const Options& opt, const ExperimentConfig& cfg) {
  return opt.out_dir.empty() ? fs::path("runs") / cfg.name : fs::path(opt.out_dir);
}

fs::path dataset_path(const Options& opt, const ExperimentConfig& cfg) {
  return opt.dataset.empty() ? out_dir(opt, cfg) / "dataset.osgdat" : fs::path(opt.dataset);
}

std::vector<LossKind> selected_methods(const Options& opt, const ExperimentConfig& cfg) {
  if (opt.methods.empty()) return cfg.methods;
  std::vector<LossKind> out;
  for (const auto& m : opt.methods) out.push_back(parse_loss_kind(m));
  return out;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

struct Variant {
  std::string label;
  ExperimentConfig cfg;
  LossKind method;
  double sweep_value = std::numeric_limits<double>::quiet_NaN();
};

/// Every (method, sweep value) combination the config asks for.
std::vector<Variant> variants(const ExperimentConfig& cfg, const std::vector<LossKind>& methods) {
  std::vector<Variant> out;
  for (LossKind m : methods) {
    if (cfg.sweep.parameter.empty() || cfg.sweep.values.empty()) {
      out.push_back({to_string(m), cfg, m});
      continue;
    }
    for (double v : cfg.sweep.values) {
      out.push_back({to_string(m) + "_" + cfg.sweep.parameter + "_" + format_value(v),
                     with_sweep_value(cfg, v), m, v});
    }
  }
  return out;
}

BurstDataset read_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(path.string(), "dataset not found (run generate first)");
  return load_dataset(path.string());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text(path.string(), j.dump(2) + "\n");
}

int cmd_generate(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const fs::path dir = out_dir(opt, cfg);
  DirLock lock(dir);
  const BurstDataset ds = generate_dataset(cfg);
  const fs::path path = dataset_path(opt, cfg);
  save_dataset(path.string(), ds);
  nlohmann::ordered_json side;
  side["provenance"] = nlohmann::ordered_json::parse(ds.provenance.to_json());
  side["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  write_json(path.string() + ".provenance.json", side);
  write_text((dir / "config.json").string(), config_to_json(cfg));
  std::cout << "wrote " << ds.size() << " bursts to " << path.string() << "\n";
  return exit_ok;
}

int cmd_train(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const fs::path dir = out_dir(opt, cfg);
  const BurstDataset ds = read_dataset(dataset_path(opt, cfg));
  DirLock lock(dir);
  for (const auto& v : variants(cfg, selected_methods(opt, cfg))) {
    const fs::path model = dir / ("model-" + v.label + ".osgmdl");
    const TrainResult r = train_method(v.cfg, v.method, ds, model.string());
    save_osgnet(model.string(), r.best_net);
    r.history.write_csv((dir / ("history-" + v.label + ".csv")).string());
    nlohmann::ordered_json info;
    info["method"] = to_string(v.method);
    info["best_validation"] = r.best_validation;
    info["optimizer_steps"] = r.optimizer_steps;
    info["seconds_per_epoch"] = r.seconds_per_epoch;
    write_json(dir / ("train-" + v.label + ".json"), info);
    std::cout << v.label << ": best validation " << std::setprecision(6) << r.best_validation
              << ", " << r.seconds_per_epoch << " s/epoch -> " << model.string() << "\n";
  }
  return exit_ok;
}

double read_seconds_per_epoch(const fs::path& dir, const std::string& label) {
  const fs::path p = dir / ("train-" + label + ".json");
  std::ifstream in(p);
  if (!in) return 0.0;
  try {
    return nlohmann::json::parse(in).value("seconds_per_epoch", 0.0);
  } catch (const nlohmann::json::exception&) {
    return 0.0;
  }
}

void write_plots(const fs::path& dir, const std::string& label, const Evaluation& ev,
                 const TestSet& test) {
  osgcli::Series curve{label, ev.report.curve.times, ev.report.curve.errors};
  osgcli::PlotSpec spec{"Mean relative error: " + label, "t", "error", true};
  write_text((dir / ("eval-" + label + ".curve.svg")).string(),
             osgcli::svg_line_plot(spec, {curve}));

  const Rollout& roll = ev.sample_rollouts.front();
  osgcli::Series truth{"reference", {}, {}, "#444444", true};
  osgcli::Series pred{"model", {}, {}, "#d62728"};
  const bool planar = test.states.front().rows() >= 2;
  for (const auto& s : test.states) {
    truth.x.push_back(planar ? s(0, 0) : 0.0);
    truth.y.push_back(planar ? s(1, 0) : s(0, 0));
  }
  for (const auto& s : roll.states) {
    pred.x.push_back(planar ? s(0) : 0.0);
    pred.y.push_back(planar ? s(1) : s(0));
  }
  if (!planar) {
    for (std::size_t i = 0; i < truth.x.size(); ++i) truth.x[i] = test.delta * static_cast<double>(i);
    for (std::size_t i = 0; i < pred.x.size(); ++i) pred.x[i] = roll.times[i];
  }
  osgcli::PlotSpec phase{"Trajectory 1: " + label, planar ? "u1" : "t", planar ? "u2" : "u1", false};
  write_text((dir / ("eval-" + label + ".phase.svg")).string(),
             osgcli::svg_line_plot(phase, {truth, pred}));
}

std::string consistency_line(const ConsistencyReport& t) {
  std::ostringstream os;
  os << "Consistency check: " << (t.holds ? "holds" : "VIOLATED") << " (violations " << t.violations
     << ", max slack " << std::scientific << std::setprecision(3) << t.max_slack << ")\n";
  return os.str();
}

struct Evaluated {
  std::string label;
  bool present = false;
  Evaluation eval;
  double seconds_per_epoch = 0.0;
};

Evaluated evaluate_one(const ExperimentConfig& cfg, const Problem& problem, const TestSet& test,
                       const fs::path& dir, const std::string& label, const fs::path& model_path,
                       const NormStats* stats, bool oracle, bool plots) {
  Evaluated out;
  out.label = label;
  Stepper stepper;
  if (oracle) {
    stepper = flow_stepper(problem.flow);
  } else {
    if (!fs::exists(model_path)) return out;
    const OsgNet net = load_osgnet(model_path.string());
    if (net.state_dim != problem.dim || (stats && stats->dim() != net.state_dim)) {
      throw DimensionError("evaluate", "model " + model_path.string() + " has dimension " +
                                           std::to_string(net.state_dim) + ", problem has " +
                                           std::to_string(problem.dim));
    }
    stepper = model_stepper(net, *stats);
    out.seconds_per_epoch = read_seconds_per_epoch(dir, label);
  }
  out.present = true;
  out.eval = evaluate_stepper(cfg, problem, test, stepper, label);
  out.eval.report.seconds_per_epoch = out.seconds_per_epoch;
  write_text((dir / ("eval-" + label + ".curve.csv")).string(), out.eval.report.curve_csv());
  write_text((dir / ("eval-" + label + ".summary.txt")).string(),
             out.eval.report.summary() + consistency_line(out.eval.consistency));
  if (plots) write_plots(dir, label, out.eval, test);
  return out;
}

struct Prepared {
  Problem problem;
  TestSet test;
  NormStats stats;
  bool have_stats = false;
};

Prepared prepare(const Options& opt, const ExperimentConfig& cfg, bool need_stats) {
  Prepared p;
  p.problem = make_problem(cfg);
  p.test = make_config_test_set(cfg, p.problem);
  if (need_stats) {
    const BurstDataset ds = read_dataset(dataset_path(opt, cfg));
    if (ds.dim != p.problem.dim) {
      throw DimensionError("evaluate", "dataset dimension " + std::to_string(ds.dim) +
                                           " differs from problem dimension " +
                                           std::to_string(p.problem.dim));
    }
    p.stats = ds.normalized ? ds.stats : compute_norm_stats(ds, ds.provenance.log_delta);
    p.have_stats = true;
  }
  return p;
}

int cmd_evaluate(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const fs::path dir = out_dir(opt, cfg);
  const Prepared prep = prepare(opt, cfg, !opt.oracle);
  DirLock lock(dir);
  std::vector<std::pair<std::string, fs::path>> jobs;
  if (opt.oracle) {
    jobs.push_back({"oracle", {}});
  } else if (!opt.model.empty()) {
    jobs.push_back({fs::path(opt.model).stem().string(), opt.model});
  } else {
    for (const auto& v : variants(cfg, selected_methods(opt, cfg))) {
      jobs.push_back({v.label, dir / ("model-" + v.label + ".osgmdl")});
    }
  }
  int missing = 0;
  for (const auto& [label, path] : jobs) {
    const Evaluated e = evaluate_one(cfg, prep.problem, prep.test, dir, label, path,
                                     prep.have_stats ? &prep.stats : nullptr, opt.oracle, opt.plots);
    if (!e.present) {
      std::cerr << "missing model: " << path.string() << "\n";
      ++missing;
      continue;
    }
    std::cout << e.eval.report.summary() << consistency_line(e.eval.consistency);
  }
  return missing == 0 ? exit_ok : exit_failure;
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

int cmd_compare(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const fs::path dir = out_dir(opt, cfg);
  const Prepared prep = prepare(opt, cfg, !opt.oracle);
  DirLock lock(dir);
  const auto vars = variants(cfg, selected_methods(opt, cfg));
  std::vector<Evaluated> rows;
  std::vector<double> sweep_values;
  for (const auto& v : vars) {
    const fs::path model = dir / ("model-" + v.label + ".osgmdl");
    rows.push_back(evaluate_one(v.cfg, prep.problem, prep.test, dir, v.label, model,
                                prep.have_stats ? &prep.stats : nullptr, opt.oracle, opt.plots));
    sweep_values.push_back(v.sweep_value);
  }

  double best_e = std::numeric_limits<double>::infinity(), best_s = best_e;
  for (const auto& r : rows) {
    if (!r.present) continue;
    best_e = std::min(best_e, r.eval.report.curve.mean);
    best_s = std::min(best_s, r.eval.report.spread.sigma);
  }
  std::ostringstream csv, table;
  csv << std::setprecision(17);
  csv << "method,mean_error,sigma\n";
  table << std::left << std::setw(28) << "method" << std::setw(20) << "Prediction error"
        << std::setw(20) << "Standard deviation" << "Time/epoch (s)\n";
  int missing = 0;
  for (const auto& r : rows) {
    if (!r.present) {
      ++missing;
      csv << r.label << ",absent,absent\n";
      table << std::setw(28) << r.label << "absent\n";
      continue;
    }
    const double e = r.eval.report.curve.mean, s = r.eval.report.spread.sigma;
    csv << r.label << ',' << e << ',' << s << '\n';
    table << std::setw(28) << r.label << std::setw(20) << (sci(e) + (e == best_e ? " *" : ""))
          << std::setw(20) << (sci(s) + (s == best_s ? " *" : "")) << sci(r.seconds_per_epoch)
          << '\n';
  }
  table << "(* marks the best value in each column)\n";
  write_text((dir / "compare.csv").string(), csv.str());
  write_text((dir / "compare.txt").string(), table.str());
  if (!cfg.sweep.parameter.empty() && !cfg.sweep.values.empty()) {
    std::ostringstream sweep;
    sweep << std::setprecision(17) << cfg.sweep.parameter << ",method,mean_error,sigma\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].present) continue;
      sweep << sweep_values[i] << ',' << to_string(vars[i].method) << ','
            << rows[i].eval.report.curve.mean << ',' << rows[i].eval.report.spread.sigma << '\n';
    }
    write_text((dir / "sweep.csv").string(), sweep.str());
  }
  std::cout << table.str();
  return missing == 0 ? exit_ok : exit_failure;
}

int cmd_verify(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const fs::path dir = out_dir(opt, cfg);
  const Problem problem = make_problem(cfg);
  std::ostringstream os;
  bool ok = true;
  if (problem.system && problem.lipschitz > 0.0) {
    IntegratorSpec fine = cfg.dataset.integrator;
    fine.tau = std::min(fine.tau, 1e-4);
    const FlowFn flow = make_flow(*problem.system, fine);
    const LipschitzReport rep = lipschitz_check(*problem.system, flow, problem.lipschitz,
                                          cfg.eval_delta(), 10000, cfg.seeds.partition);
    os << "Lipschitz flow bound (" << rep.pairs << " pairs, delta " << cfg.eval_delta() << "): "
       << (rep.violations == 0 ? "holds" : "VIOLATED") << ", violations " << rep.violations
       << ", max relative excess " << sci(rep.max_violation) << '\n';
    ok = ok && rep.violations == 0;
  } else {
    os << "Lipschitz flow bound: skipped (no global Lipschitz constant for " << problem.name << ")\n";
  }

  const Matrix probes =
      sample_initial_states(problem.dim, cfg.evaluation.consistency_probes, problem.sample,
                            stream_seed(cfg.seeds.partition, 0x5645524946ULL));
  const double T = cfg.eval_horizon();
  Matrix truth(probes.rows(), probes.cols());
  for (Eigen::Index c = 0; c < probes.cols(); ++c) truth.col(c) = problem.flow(probes.col(c), T);
  const auto parts = random_partitions(T, cfg.dataset.delta_min, cfg.dataset.delta_max,
                                       cfg.evaluation.consistency_partitions, cfg.seeds.partition);

  std::vector<std::pair<std::string, Stepper>> steppers;
  NormStats stats = NormStats::identity(problem.dim);
  const fs::path ds_path = dataset_path(opt, cfg);
  if (fs::exists(ds_path)) {
    const BurstDataset ds = load_dataset(ds_path.string());
    stats = ds.normalized ? ds.stats : compute_norm_stats(ds, ds.provenance.log_delta);
  }
  {
    ExperimentConfig init_cfg = cfg;
    steppers.push_back({"random-init", model_stepper(initial_network(init_cfg, stats), stats)});
  }
  for (const auto& v : variants(cfg, selected_methods(opt, cfg))) {
    const fs::path model = dir / ("model-" + v.label + ".osgmdl");
    if (!fs::exists(model)) continue;
    steppers.push_back({v.label, model_stepper(load_osgnet(model.string()), stats)});
  }
  for (const auto& [label, stepper] : steppers) {
    const ConsistencyReport t = consistency_check(stepper, probes, truth, parts);
    os << label << ": " << consistency_line(t);
    ok = ok && t.holds;
    if (problem.system && problem.lipschitz > 0.0) {
      std::vector<Vector> grid;
      for (Eigen::Index c = 0; c < probes.cols(); ++c) grid.push_back(probes.col(c));
      BoundContext ctx;
      ctx.lipschitz = problem.lipschitz;
      ctx.sup_error = sampled_sup_error(stepper, problem.flow, grid, cfg.dataset.delta_min,
                                        cfg.dataset.delta_max, 5);
      const double d = cfg.eval_delta();
      const int steps = cfg.evaluation.steps;
      const Matrix end = rollout_end(stepper, probes, Partition{std::vector<double>(steps, d)});
      double worst = 0.0;
      for (Eigen::Index c = 0; c < probes.cols(); ++c) {
        worst = std::max(worst, (end.col(c) - problem.flow(probes.col(c), steps * d)).norm());
      }
      os << label << ": sampled-domain bound at t = " << steps * d << ": error " << sci(worst)
         << " vs bound " << sci(accumulated_error_bound(ctx, d, steps)) << '\n';
    }
  }
  std::cout << os.str();
  if (fs::exists(dir)) {
    DirLock lock(dir);
    write_text((dir / "verify.txt").string(), os.str());
  }
  return ok ? exit_ok : exit_failure;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return exit_config;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return exit_config;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return exit_numeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semigroup-informed flow-map learning: generate, train, evaluate, compare, verify"};
  app.require_subcommand(1);
  Options opt;
  bool list = false;
  app.add_flag("--list-configs", list, "Print the bundled config names and exit");

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Config file or bundled config name")->required();
    sub->add_option("--out-dir", opt.out_dir, "Run directory (default runs/<name>)");
    sub->add_option("--dataset", opt.dataset, "Dataset file (default <out-dir>/dataset.osgdat)");
    sub->add_option("--seed-override", opt.seed_overrides,
                    "N (all seeds) or name=N for dataset|init|tuples|split|partition");
  };
  auto methods = [&opt](CLI::App* sub) {
    sub->add_option("--method", opt.methods, "baseline, lisg or gdsg (repeatable)")
        ->check(CLI::IsMember({"baseline", "lisg", "gdsg"}));
  };

  CLI::App* gen = app.add_subcommand("generate", "Generate the burst dataset");
  common(gen);
  CLI::App* tr = app.add_subcommand("train", "Train one or more methods");
  common(tr);
  methods(tr);
  CLI::App* ev = app.add_subcommand("evaluate", "Evaluate trained models");
  common(ev);
  methods(ev);
  ev->add_option("--model", opt.model, "Evaluate this model file only");
  ev->add_flag("--oracle", opt.oracle, "Use the reference integrator as the model");
  ev->add_flag("--plots", opt.plots, "Also write SVG plots");
  CLI::App* cmp = app.add_subcommand("compare", "Compare methods (and sweep values)");
  common(cmp);
  methods(cmp);
  cmp->add_flag("--oracle", opt.oracle, "Use the reference integrator for every method");
  cmp->add_flag("--plots", opt.plots, "Also write SVG plots");
  CLI::App* ver = app.add_subcommand("verify", "Run the Lipschitz, error-bound and partition-consistency checks");
  common(ver);
  methods(ver);

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }
  if (list) {
    for (const auto& n : bundled_config_names()) std::cout << n << "\n";
    return exit_ok;
  }
  if (gen->parsed()) return run_guarded([&] { return cmd_generate(opt); });
  if (tr->parsed()) return run_guarded([&] { return cmd_train(opt); });
  if (ev->parsed()) return run_guarded([&] { return cmd_evaluate(opt); });
  if (cmp->parsed()) return run_guarded([&] { return cmd_compare(opt); });
  if (ver->parsed()) return run_guarded([&] { return cmd_verify(opt); });
  std::cerr << app.help();
  return exit_config;
}
