#include "deeposg/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deeposg/error.hpp"
#include "deeposg/modal.hpp"
#include "deeposg/systems.hpp"

namespace deeposg {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

bool DatasetConfig::operator==(const DatasetConfig& o) const {
  return bursts == o.bursts && delta_min == o.delta_min && delta_max == o.delta_max &&
         log_delta == o.log_delta && domain_lo == o.domain_lo && domain_hi == o.domain_hi &&
         noise == o.noise && integrator.kind == o.integrator.kind &&
         integrator.tau == o.integrator.tau && integrator.tol == o.integrator.tol;
}

bool NetworkConfig::operator==(const NetworkConfig& o) const {
  return spec.hidden == o.spec.hidden && spec.block_count == o.spec.block_count &&
         spec.sharing == o.spec.sharing && spec.variant == o.spec.variant &&
         spec.zero_output_layer == o.spec.zero_output_layer;
}

bool TrainingConfig::operator==(const TrainingConfig& o) const {
  return epochs == o.epochs && batch_size == o.batch_size && lambda == o.lambda && q == o.q &&
         metric == o.metric && lr.base_lr == o.lr.base_lr && lr.max_lr == o.lr.max_lr &&
         lr.cycle_length == o.lr.cycle_length && validation_fraction == o.validation_fraction &&
         dynamic_validation == o.dynamic_validation && validation_every == o.validation_every &&
         history_interval == o.history_interval && probe_tuples == o.probe_tuples &&
         sg_domain_lo == o.sg_domain_lo && sg_domain_hi == o.sg_domain_hi;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return name == o.name && kind == o.kind && problem == o.problem && dataset == o.dataset &&
         network == o.network && training == o.training && evaluation == o.evaluation &&
         seeds == o.seeds && methods == o.methods && sweep == o.sweep;
}

double ExperimentConfig::eval_delta() const {
  return evaluation.delta > 0.0 ? evaluation.delta : 0.5 * (dataset.delta_min + dataset.delta_max);
}

double ExperimentConfig::eval_horizon() const {
  return evaluation.horizon > 0.0 ? evaluation.horizon : evaluation.steps * eval_delta();
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
  };
  int dim = 0;
  if (kind == "ode") {
    dim = make_system(problem).dim;
  } else if (kind == "modal") {
    dim = modal_dim(parse_modal_pde(problem));
  } else {
    fail("kind", "expected 'ode' or 'modal'");
  }
  if (dataset.bursts < 2) fail("dataset.bursts", "must be at least 2");
  if (!(dataset.delta_min > 0.0)) fail("dataset.delta_min", "must be positive");
  if (!(dataset.delta_max >= dataset.delta_min)) fail("dataset.delta_max", "must be >= delta_min");
  if (dataset.domain_lo.size() != dataset.domain_hi.size()) {
    fail("dataset.domain", "lo and hi lengths differ");
  }
  if (!dataset.domain_lo.empty()) {
    if (static_cast<int>(dataset.domain_lo.size()) != dim) fail("dataset.domain", "wrong dimension");
    for (std::size_t i = 0; i < dataset.domain_lo.size(); ++i) {
      if (dataset.domain_lo[i] > dataset.domain_hi[i]) fail("dataset.domain", "lo > hi");
    }
  }
  if (!(dataset.noise >= 0.0)) fail("dataset.noise", "must be non-negative");
  if (!(dataset.integrator.tau > 0.0)) fail("dataset.integrator.tau", "must be positive");
  if (!(dataset.integrator.tol > 0.0)) fail("dataset.integrator.tol", "must be positive");
  if (network.spec.hidden.empty()) fail("network.hidden", "need at least one hidden layer");
  for (int w : network.spec.hidden) {
    if (w < 1) fail("network.hidden", "widths must be positive");
  }
  if (network.spec.block_count < 1) fail("network.blocks", "must be at least 1");
  if (training.epochs < 1) fail("training.epochs", "must be at least 1");
  if (training.batch_size < 1) fail("training.batch_size", "must be at least 1");
  if (!(training.lambda > 0.0)) fail("training.lambda", "must be positive");
  if (training.q < 1) fail("training.q", "must be at least 1");
  if (!(training.lr.base_lr > 0.0)) fail("training.lr.base", "must be positive");
  if (!(training.lr.max_lr >= training.lr.base_lr)) fail("training.lr.max", "must be >= base");
  if (training.lr.cycle_length < 1) fail("training.lr.cycle", "must be positive");
  if (!(training.validation_fraction > 0.0 && training.validation_fraction < 1.0)) {
    fail("training.validation_fraction", "must lie in (0, 1)");
  }
  if (training.validation_every < 1) fail("training.validation_every", "must be at least 1");
  if (training.history_interval < 1) fail("training.history_interval", "must be at least 1");
  if (training.sg_domain_lo.size() != training.sg_domain_hi.size()) {
    fail("training.sg_domain", "lo and hi lengths differ");
  }
  if (!training.sg_domain_lo.empty() && static_cast<int>(training.sg_domain_lo.size()) != dim) {
    fail("training.sg_domain", "wrong dimension");
  }
  if (evaluation.trajectories < 1) fail("evaluation.trajectories", "must be at least 1");
  if (evaluation.steps < 1) fail("evaluation.steps", "M must be at least 1");
  if (evaluation.delta < 0.0) fail("evaluation.delta", "must be non-negative");
  if (evaluation.partitions < 2) fail("evaluation.partitions", "K must be at least 2");
  if (evaluation.horizon < 0.0) fail("evaluation.horizon", "must be non-negative");
  if (evaluation.consistency_probes < 1) fail("evaluation.consistency_probes", "must be at least 1");
  if (evaluation.consistency_partitions < 1) fail("evaluation.consistency_partitions", "must be >= 1");
  if (methods.empty()) fail("methods", "need at least one method");
  if (!sweep.parameter.empty() && sweep.parameter != "lambda" && sweep.parameter != "q") {
    fail("sweep.parameter", "expected 'lambda' or 'q'");
  }
  for (double v : sweep.values) {
    if (!(v > 0.0)) fail("sweep.values", "must be positive");
    if (sweep.parameter == "q" && v != std::floor(v)) fail("sweep.values", "Q must be integral");
  }
}

namespace {

/// Strict object reader: typed getters with dotted field paths and rejection of
/// unknown keys.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("field '" + label() + "': expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(key, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::optional<Reader> object(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Reader(j_.at(key), child(key));
  }

  /// Converts any error from a value parser into a field diagnostic.
  template <typename F>
  auto convert(const std::string& key, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
    throw ConfigError("unreachable");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("field '" + child(it.key()) + "': unknown field");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("field '" + child(key) + "': " + msg);
  }

private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string position_message(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

IntegratorSpec::Kind parse_integrator(const std::string& s) {
  if (s == "rk4") return IntegratorSpec::Kind::rk4;
  if (s == "stiff") return IntegratorSpec::Kind::stiff;
  throw ConfigError("unknown integrator '" + s + "' (expected rk4 or stiff)");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + position_message(text, e.byte) + ": malformed JSON");
  }
  ExperimentConfig cfg;
  try {
    Reader root(doc, "");
    cfg.name = root.string("name", cfg.name);
    cfg.kind = root.string("kind", cfg.kind);
    cfg.problem = root.string("problem", cfg.problem);
    if (auto d = root.object("dataset")) {
      DatasetConfig& ds = cfg.dataset;
      const auto bursts = d->integer("bursts", static_cast<std::int64_t>(ds.bursts));
      if (bursts < 0) d->fail("bursts", "must be non-negative");
      ds.bursts = static_cast<std::size_t>(bursts);
      ds.delta_min = d->number("delta_min", ds.delta_min);
      ds.delta_max = d->number("delta_max", ds.delta_max);
      ds.log_delta = d->boolean("log_delta", ds.log_delta);
      ds.domain_lo = d->numbers("domain_lo", ds.domain_lo);
      ds.domain_hi = d->numbers("domain_hi", ds.domain_hi);
      ds.noise = d->number("noise", ds.noise);
      if (auto in = d->object("integrator")) {
        const std::string k = in->string("kind", "rk4");
        ds.integrator.kind = in->convert("kind", [&] { return parse_integrator(k); });
        ds.integrator.tau = in->number("tau", ds.integrator.tau);
        ds.integrator.tol = in->number("tol", ds.integrator.tol);
        in->finish();
      }
      d->finish();
    }
    if (auto n = root.object("network")) {
      NetSpec& s = cfg.network.spec;
      std::vector<double> hidden(s.hidden.begin(), s.hidden.end());
      hidden = n->numbers("hidden", hidden);
      s.hidden.clear();
      for (double h : hidden) {
        if (h != std::floor(h)) n->fail("hidden", "widths must be integers");
        s.hidden.push_back(static_cast<int>(h));
      }
      s.block_count = static_cast<int>(n->integer("blocks", s.block_count));
      const std::string sharing = n->string("sharing", to_string(s.sharing));
      s.sharing = n->convert("sharing", [&] { return parse_sharing(sharing); });
      const std::string variant = n->string("variant", to_string(s.variant));
      s.variant = n->convert("variant", [&] { return parse_block_variant(variant); });
      s.zero_output_layer = n->boolean("zero_output_layer", s.zero_output_layer);
      n->finish();
    }
    if (auto t = root.object("training")) {
      TrainingConfig& tc = cfg.training;
      tc.epochs = static_cast<int>(t->integer("epochs", tc.epochs));
      tc.batch_size = static_cast<int>(t->integer("batch_size", tc.batch_size));
      tc.lambda = t->number("lambda", tc.lambda);
      tc.q = static_cast<int>(t->integer("q", tc.q));
      const std::string metric = t->string("metric", to_string(tc.metric));
      tc.metric = t->convert("metric", [&] { return parse_metric(metric); });
      if (auto lr = t->object("lr")) {
        tc.lr.base_lr = lr->number("base", tc.lr.base_lr);
        tc.lr.max_lr = lr->number("max", tc.lr.max_lr);
        const auto cycle = lr->integer("cycle", static_cast<std::int64_t>(tc.lr.cycle_length));
        if (cycle < 1) lr->fail("cycle", "must be positive");
        tc.lr.cycle_length = static_cast<std::uint64_t>(cycle);
        lr->finish();
      }
      tc.validation_fraction = t->number("validation_fraction", tc.validation_fraction);
      tc.dynamic_validation = t->boolean("dynamic_validation", tc.dynamic_validation);
      tc.validation_every = static_cast<int>(t->integer("validation_every", tc.validation_every));
      tc.history_interval = static_cast<int>(t->integer("history_interval", tc.history_interval));
      tc.probe_tuples = static_cast<int>(t->integer("probe_tuples", tc.probe_tuples));
      tc.sg_domain_lo = t->numbers("sg_domain_lo", tc.sg_domain_lo);
      tc.sg_domain_hi = t->numbers("sg_domain_hi", tc.sg_domain_hi);
      t->finish();
    }
    if (auto e = root.object("evaluation")) {
      EvaluationConfig& ec = cfg.evaluation;
      ec.trajectories = static_cast<int>(e->integer("trajectories", ec.trajectories));
      ec.steps = static_cast<int>(e->integer("steps", ec.steps));
      ec.delta = e->number("delta", ec.delta);
      ec.partitions = static_cast<int>(e->integer("partitions", ec.partitions));
      ec.horizon = e->number("horizon", ec.horizon);
      ec.consistency_probes = static_cast<int>(e->integer("consistency_probes", ec.consistency_probes));
      ec.consistency_partitions =
          static_cast<int>(e->integer("consistency_partitions", ec.consistency_partitions));
      e->finish();
    }
    if (auto s = root.object("seeds")) {
      cfg.seeds.dataset = s->seed("dataset", cfg.seeds.dataset);
      cfg.seeds.init = s->seed("init", cfg.seeds.init);
      cfg.seeds.tuples = s->seed("tuples", cfg.seeds.tuples);
      cfg.seeds.split = s->seed("split", cfg.seeds.split);
      cfg.seeds.partition = s->seed("partition", cfg.seeds.partition);
      s->finish();
    }
    if (root.has("methods")) {
      std::vector<std::string> names = root.strings("methods", {});
      cfg.methods.clear();
      for (const auto& m : names) {
        cfg.methods.push_back(root.convert("methods", [&] { return parse_loss_kind(m); }));
      }
    }
    if (auto sw = root.object("sweep")) {
      cfg.sweep.parameter = sw->string("parameter", "");
      cfg.sweep.values = sw->numbers("values", {});
      sw->finish();
    }
    root.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  j["name"] = cfg.name;
  j["kind"] = cfg.kind;
  j["problem"] = cfg.problem;
  const DatasetConfig& d = cfg.dataset;
  j["dataset"] = {{"bursts", d.bursts},
                  {"delta_min", d.delta_min},
                  {"delta_max", d.delta_max},
                  {"log_delta", d.log_delta},
                  {"domain_lo", d.domain_lo},
                  {"domain_hi", d.domain_hi},
                  {"noise", d.noise},
                  {"integrator",
                   {{"kind", d.integrator.kind == IntegratorSpec::Kind::rk4 ? "rk4" : "stiff"},
                    {"tau", d.integrator.tau},
                    {"tol", d.integrator.tol}}}};
  const NetSpec& n = cfg.network.spec;
  j["network"] = {{"hidden", n.hidden},
                  {"blocks", n.block_count},
                  {"sharing", to_string(n.sharing)},
                  {"variant", to_string(n.variant)},
                  {"zero_output_layer", n.zero_output_layer}};
  const TrainingConfig& t = cfg.training;
  j["training"] = {{"epochs", t.epochs},
                   {"batch_size", t.batch_size},
                   {"lambda", t.lambda},
                   {"q", t.q},
                   {"metric", to_string(t.metric)},
                   {"lr", {{"base", t.lr.base_lr}, {"max", t.lr.max_lr}, {"cycle", t.lr.cycle_length}}},
                   {"validation_fraction", t.validation_fraction},
                   {"dynamic_validation", t.dynamic_validation},
                   {"validation_every", t.validation_every},
                   {"history_interval", t.history_interval},
                   {"probe_tuples", t.probe_tuples},
                   {"sg_domain_lo", t.sg_domain_lo},
                   {"sg_domain_hi", t.sg_domain_hi}};
  const EvaluationConfig& e = cfg.evaluation;
  j["evaluation"] = {{"trajectories", e.trajectories},
                     {"steps", e.steps},
                     {"delta", e.delta},
                     {"partitions", e.partitions},
                     {"horizon", e.horizon},
                     {"consistency_probes", e.consistency_probes},
                     {"consistency_partitions", e.consistency_partitions}};
  j["seeds"] = {{"dataset", cfg.seeds.dataset},
                {"init", cfg.seeds.init},
                {"tuples", cfg.seeds.tuples},
                {"split", cfg.seeds.split},
                {"partition", cfg.seeds.partition}};
  std::vector<std::string> methods;
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["sweep"] = {{"parameter", cfg.sweep.parameter}, {"values", cfg.sweep.values}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(path_or_name, ec)) {
    std::ifstream in(path_or_name, std::ios::binary);
    if (!in) throw IoError(path_or_name, "cannot open config file");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str(), path_or_name);
  }
  for (const auto& name : bundled_config_names()) {
    if (name == path_or_name) return bundled_config(name);
  }
  throw ConfigError(path_or_name + ": no such config file or bundled config name");
}

namespace {

ExperimentConfig base(const std::string& name, const std::string& kind, const std::string& problem) {
  ExperimentConfig c;
  c.name = name;
  c.kind = kind;
  c.problem = problem;
  return c;
}

ExperimentConfig linear_config() {
  ExperimentConfig c = base("linear", "ode", "linear");
  c.dataset.bursts = 10;
  c.network.spec.hidden = {30, 30, 30};
  c.training.epochs = 20000;
  c.training.batch_size = 5;
  c.training.lambda = 1.0;
  c.training.q = 5;
  c.evaluation.trajectories = 100;
  c.evaluation.steps = 20;
  c.evaluation.partitions = 100;
  return c;
}

ExperimentConfig advection_config(int blocks) {
  ExperimentConfig c = base("advection-k" + std::to_string(blocks), "modal", "advection");
  c.dataset.bursts = 1000;
  c.network.spec.hidden = {20, 20, 20};
  c.network.spec.block_count = blocks;
  c.training.epochs = 5000;
  c.training.batch_size = 30;
  c.training.validation_every = 10;
  c.training.lambda = 1.0;
  c.evaluation.steps = 200;
  c.evaluation.partitions = 20;
  c.methods = {LossKind::gdsg};
  return c;
}

}  // namespace

std::vector<std::string> bundled_config_names() {
  return {"linear",     "linear-noise-02",      "linear-noise-05",  "attractor",
          "pendulum",   "robertson-multiscale", "robertson-large",  "glycolytic",
          "advection-k1", "advection-k2",       "advection-k3",     "advection-k4",
          "burgers-viscous", "convdiff2d",      "heat-nodal-demo"};
}

ExperimentConfig bundled_config(const std::string& name) {
  if (name == "linear") return linear_config();
  if (name == "linear-noise-02" || name == "linear-noise-05") {
    ExperimentConfig c = linear_config();
    c.name = name;
    c.dataset.bursts = 400;
    c.dataset.noise = name == "linear-noise-02" ? 0.02 : 0.05;
    c.training.epochs = 2000;
    c.training.validation_every = 8;
    c.methods = {LossKind::gdsg};
    return c;
  }
  if (name == "attractor") {
    ExperimentConfig c = base(name, "ode", "periodic_attractor");
    c.dataset.bursts = 50;
    c.network.spec.hidden = {60, 60, 60};
    c.training.epochs = 5000;
    c.training.lambda = 2.0;
    c.evaluation.steps = 200;
    c.evaluation.partitions = 20;
    return c;
  }
  if (name == "pendulum") {
    ExperimentConfig c = base(name, "ode", "damped_pendulum");
    c.dataset.bursts = 100;
    c.network.spec.hidden = {60, 60, 60};
    c.training.epochs = 3000;
    c.training.lambda = 1.0;
    c.evaluation.steps = 200;
    c.evaluation.partitions = 20;
    return c;
  }
  if (name == "robertson-multiscale") {
    ExperimentConfig c = base(name, "ode", "robertson");
    c.dataset.bursts = 500;
    c.dataset.delta_min = std::pow(10.0, -4.9);
    c.dataset.delta_max = std::pow(10.0, 0.1);
    c.dataset.log_delta = true;
    c.dataset.integrator.kind = IntegratorSpec::Kind::stiff;
    c.dataset.integrator.tol = 1e-7;
    c.network.spec.hidden = {60, 60, 60};
    c.network.spec.variant = BlockVariant::multiscale;
    c.training.epochs = 1000;
    c.training.validation_every = 10;
    c.evaluation.trajectories = 20;
    c.evaluation.steps = 20;
    c.evaluation.delta = 5e-5;
    c.evaluation.partitions = 10;
    return c;
  }
  if (name == "robertson-large") {
    ExperimentConfig c = base(name, "ode", "robertson");
    c.dataset.bursts = 200;
    c.dataset.delta_min = 5.0;
    c.dataset.delta_max = 15.0;
    c.dataset.integrator.kind = IntegratorSpec::Kind::stiff;
    c.dataset.integrator.tol = 1e-7;
    c.network.spec.hidden = {60, 60, 60};
    c.training.epochs = 1000;
    c.training.validation_every = 10;
    c.evaluation.trajectories = 20;
    c.evaluation.steps = 20;
    c.evaluation.partitions = 10;
    return c;
  }
  if (name == "glycolytic") {
    ExperimentConfig c = base(name, "ode", "glycolytic");
    c.dataset.bursts = 4000;
    c.dataset.integrator.tau = 1e-3;
    c.network.spec.hidden = {40, 40, 40};
    c.network.spec.block_count = 4;
    c.training.epochs = 200;
    c.training.batch_size = 90;
    c.training.validation_every = 10;
    c.evaluation.steps = 50;
    c.evaluation.partitions = 10;
    return c;
  }
  if (name.rfind("advection-k", 0) == 0 && name.size() == 12) {
    const int k = name.back() - '0';
    if (k >= 1 && k <= 4) return advection_config(k);
  }
  if (name == "burgers-viscous") {
    ExperimentConfig c = base(name, "modal", "viscous_burgers");
    c.dataset.bursts = 2000;
    c.dataset.delta_min = 0.025;
    c.dataset.delta_max = 0.075;
    c.network.spec.hidden = {30, 30, 30};
    c.network.spec.block_count = 4;
    c.training.epochs = 300;
    c.training.batch_size = 90;
    c.training.lambda = 2.0;
    c.training.validation_every = 10;
    c.evaluation.steps = 80;
    c.evaluation.partitions = 10;
    return c;
  }
  if (name == "convdiff2d") {
    ExperimentConfig c = base(name, "modal", "convdiff2d");
    c.dataset.bursts = 2000;
    c.network.spec.hidden = {40, 40, 40};
    c.network.spec.block_count = 3;
    c.training.epochs = 300;
    c.training.batch_size = 90;
    c.training.lambda = 2.0;
    c.training.validation_every = 10;
    c.evaluation.steps = 30;
    c.evaluation.partitions = 10;
    return c;
  }
  if (name == "heat-nodal-demo") {
    ExperimentConfig c = base(name, "ode", "heat_nodal");
    c.dataset.bursts = 200;
    c.network.spec.hidden = {32, 32};
    c.training.epochs = 200;
    c.training.batch_size = 10;
    c.evaluation.trajectories = 20;
    c.evaluation.steps = 20;
    c.evaluation.partitions = 10;
    c.methods = {LossKind::baseline, LossKind::gdsg};
    return c;
  }
  throw ConfigError("unknown bundled config '" + name + "'");
}

}  // namespace deeposg
