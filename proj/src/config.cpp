#include "ransim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ransim {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string elem(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

// Typos and stale keys fail loudly instead of silently falling back to a
// default the user did not intend.
void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (ok.find(it.key()) == ok.end()) fail(join(path, it.key()), "unknown field");
  }
}

bool has(const json& j, const char* key) { return j.find(key) != j.end(); }

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

std::uint64_t get_uint(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    fail(path, "expected an integer");
  }
  return j.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], elem(path, i)));
  return out;
}

NoiseModel parse_noise(const json& j, const std::string& path) {
  require_object(j, path);
  if (!has(j, "kind")) fail(join(path, "kind"), "missing");
  const std::string kind = get_string(j.at("kind"), join(path, "kind"));
  try {
    if (kind == "none") {
      reject_unknown(j, path, {"kind"});
      return NoiseModel::none();
    }
    if (kind == "gaussian") {
      reject_unknown(j, path, {"kind", "scale"});
      if (!has(j, "scale")) fail(join(path, "scale"), "missing");
      return NoiseModel::gaussian(get_number(j.at("scale"), join(path, "scale")));
    }
    if (kind == "student_t") {
      reject_unknown(j, path, {"kind", "dof", "scale"});
      if (!has(j, "dof")) fail(join(path, "dof"), "missing");
      if (!has(j, "scale")) fail(join(path, "scale"), "missing");
      return NoiseModel::student_t(get_number(j.at("dof"), join(path, "dof")),
                                   get_number(j.at("scale"), join(path, "scale")));
    }
    if (kind == "pareto") {
      reject_unknown(j, path, {"kind", "shape", "scale"});
      if (!has(j, "shape")) fail(join(path, "shape"), "missing");
      if (!has(j, "scale")) fail(join(path, "scale"), "missing");
      return NoiseModel::pareto(get_number(j.at("shape"), join(path, "shape")),
                                get_number(j.at("scale"), join(path, "scale")));
    }
    if (kind == "gate") {
      reject_unknown(j, path, {"kind", "q"});
      if (!has(j, "q")) fail(join(path, "q"), "missing");
      return NoiseModel::bernoulli_gate(get_number(j.at("q"), join(path, "q")));
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config:", 0) == 0) throw;
    fail(path, msg);
  }
  fail(join(path, "kind"),
       "must be one of none, gaussian, student_t, pareto, gate");
}

ProblemConfig parse_problem(const json& j, const std::string& path) {
  require_object(j, path);
  ProblemConfig p;
  if (!has(j, "kind")) fail(join(path, "kind"), "missing");
  const std::string kind = get_string(j.at("kind"), join(path, "kind"));
  if (kind == "quadratic") {
    p.kind = ProblemConfig::Kind::Quadratic;
    reject_unknown(j, path, {"kind", "dim", "build_seed", "rows", "ridge", "noise"});
  } else if (kind == "chain") {
    p.kind = ProblemConfig::Kind::Chain;
    reject_unknown(j, path, {"kind", "dim", "smoothness", "length_scale", "noise"});
  } else {
    fail(join(path, "kind"), "must be quadratic or chain");
  }

  if (!has(j, "dim")) fail(join(path, "dim"), "missing");
  const std::int64_t dim = get_int(j.at("dim"), join(path, "dim"));
  if (dim < 1) fail(join(path, "dim"), "must be >= 1");
  p.dim = static_cast<std::size_t>(dim);

  if (p.kind == ProblemConfig::Kind::Quadratic) {
    if (has(j, "build_seed")) p.build_seed = get_uint(j.at("build_seed"), join(path, "build_seed"));
    if (has(j, "rows")) {
      const std::int64_t rows = get_int(j.at("rows"), join(path, "rows"));
      if (rows < 1) fail(join(path, "rows"), "must be >= 1");
      p.rows = static_cast<std::size_t>(rows);
    }
    if (has(j, "ridge")) {
      p.ridge = get_number(j.at("ridge"), join(path, "ridge"));
      if (!(p.ridge >= 0.0)) fail(join(path, "ridge"), "must be >= 0");
    }
  } else {
    if (has(j, "smoothness")) {
      p.smoothness = get_number(j.at("smoothness"), join(path, "smoothness"));
      if (!(p.smoothness > 0.0)) fail(join(path, "smoothness"), "must be > 0");
    }
    if (has(j, "length_scale")) {
      p.length_scale = get_number(j.at("length_scale"), join(path, "length_scale"));
      if (!(p.length_scale > 0.0)) fail(join(path, "length_scale"), "must be > 0");
    }
  }

  if (has(j, "noise")) p.noise = parse_noise(j.at("noise"), join(path, "noise"));
  if (p.noise.kind == NoiseModel::Kind::BernoulliGate &&
      p.kind != ProblemConfig::Kind::Chain) {
    fail(join(path, "noise"), "gate noise requires the chain problem");
  }
  return p;
}

WorkerGroup parse_worker_group(const json& j, const std::string& path) {
  require_object(j, path);
  WorkerGroup g;
  if (has(j, "count")) {
    const std::int64_t c = get_int(j.at("count"), join(path, "count"));
    if (c < 1) fail(join(path, "count"), "must be >= 1");
    g.count = static_cast<std::size_t>(c);
  }
  if (!has(j, "model")) fail(join(path, "model"), "missing");
  const std::string model = get_string(j.at("model"), join(path, "model"));
  try {
    if (model == "fixed") {
      reject_unknown(j, path, {"count", "model", "tau"});
      if (!has(j, "tau")) fail(join(path, "tau"), "missing");
      g.profile = WorkerProfile::fixed(get_number(j.at("tau"), join(path, "tau")));
    } else if (model == "exponential") {
      reject_unknown(j, path, {"count", "model", "mean"});
      if (!has(j, "mean")) fail(join(path, "mean"), "missing");
      g.profile = WorkerProfile::exponential(get_number(j.at("mean"), join(path, "mean")));
    } else if (model == "pareto") {
      reject_unknown(j, path, {"count", "model", "shape", "mean"});
      if (!has(j, "shape")) fail(join(path, "shape"), "missing");
      if (!has(j, "mean")) fail(join(path, "mean"), "missing");
      g.profile = WorkerProfile::pareto(get_number(j.at("shape"), join(path, "shape")),
                                        get_number(j.at("mean"), join(path, "mean")));
    } else if (model == "universal") {
      reject_unknown(j, path, {"count", "model", "knots", "rates"});
      if (!has(j, "knots")) fail(join(path, "knots"), "missing");
      if (!has(j, "rates")) fail(join(path, "rates"), "missing");
      g.profile = WorkerProfile::universal(
          PiecewisePower(get_number_array(j.at("knots"), join(path, "knots")),
                         get_number_array(j.at("rates"), join(path, "rates"))));
    } else {
      fail(join(path, "model"),
           "must be one of fixed, exponential, pareto, universal");
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config:", 0) == 0) throw;
    fail(path, msg);
  }
  return g;
}

const std::set<std::string> kPolicyNames = {
    "ransgdm", "ringmaster_asgd", "vanilla_asgd", "delay_adaptive_asgd", "rennala"};

PolicyConfig parse_policy(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"name", "eta", "momentum", "delay_cut", "batch", "theory"});
  PolicyConfig p;
  if (!has(j, "name")) fail(join(path, "name"), "missing");
  p.name = get_string(j.at("name"), join(path, "name"));
  if (kPolicyNames.find(p.name) == kPolicyNames.end()) {
    fail(join(path, "name"),
         "must be one of ransgdm, ringmaster_asgd, vanilla_asgd, "
         "delay_adaptive_asgd, rennala");
  }

  const bool wants_momentum = p.name == "ransgdm";
  const bool wants_cut = p.name == "ransgdm" || p.name == "ringmaster_asgd";
  const bool wants_batch = p.name == "rennala";

  if (has(j, "eta")) {
    p.eta = get_number(j.at("eta"), join(path, "eta"));
    if (!(*p.eta > 0.0)) fail(join(path, "eta"), "must be > 0");
  }
  if (has(j, "momentum")) {
    if (!wants_momentum) fail(join(path, "momentum"), "not used by " + p.name);
    p.momentum = get_number(j.at("momentum"), join(path, "momentum"));
    if (!(*p.momentum >= 0.0 && *p.momentum < 1.0)) {
      fail(join(path, "momentum"), "must be in [0, 1)");
    }
  }
  if (has(j, "delay_cut")) {
    if (!wants_cut) fail(join(path, "delay_cut"), "not used by " + p.name);
    p.delay_cut = get_int(j.at("delay_cut"), join(path, "delay_cut"));
    if (*p.delay_cut < 1) fail(join(path, "delay_cut"), "must be >= 1");
  }
  if (has(j, "batch")) {
    if (!wants_batch) fail(join(path, "batch"), "not used by " + p.name);
    p.batch = get_int(j.at("batch"), join(path, "batch"));
    if (*p.batch < 1) fail(join(path, "batch"), "must be >= 1");
  }
  if (has(j, "theory")) {
    const json& t = require_object(j.at("theory"), join(path, "theory"));
    reject_unknown(t, join(path, "theory"), {"L", "delta", "sigma", "p", "eps"});
    PolicyConfig::Theory th;
    for (const char* key : {"L", "delta", "sigma", "p", "eps"}) {
      if (!has(t, key)) fail(join(join(path, "theory"), key), "missing");
    }
    th.L = get_number(t.at("L"), join(join(path, "theory"), "L"));
    th.delta = get_number(t.at("delta"), join(join(path, "theory"), "delta"));
    th.sigma = get_number(t.at("sigma"), join(join(path, "theory"), "sigma"));
    th.p = get_number(t.at("p"), join(join(path, "theory"), "p"));
    th.eps = get_number(t.at("eps"), join(join(path, "theory"), "eps"));
    if (!(th.L > 0.0)) fail(join(join(path, "theory"), "L"), "must be > 0");
    if (!(th.delta > 0.0)) fail(join(join(path, "theory"), "delta"), "must be > 0");
    if (!(th.sigma >= 0.0)) fail(join(join(path, "theory"), "sigma"), "must be >= 0");
    if (!(th.p > 1.0 && th.p <= 2.0)) fail(join(join(path, "theory"), "p"), "must be in (1, 2]");
    if (!(th.eps > 0.0)) fail(join(join(path, "theory"), "eps"), "must be > 0");
    p.theory = th;
  }

  // Every knob the policy runs with must come from somewhere.
  if (!p.eta && !p.theory) fail(path, "needs eta or theory");
  if (wants_momentum && !p.momentum && !p.theory) {
    fail(path, "ransgdm needs momentum or theory");
  }
  if (wants_cut && !p.delay_cut && !p.theory) {
    fail(path, p.name + " needs delay_cut or theory");
  }
  if (wants_batch && !p.batch) fail(join(path, "batch"), "required for rennala");
  return p;
}

HorizonConfig parse_horizon(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"max_time", "max_rounds"});
  const bool by_time = has(j, "max_time");
  const bool by_rounds = has(j, "max_rounds");
  if (by_time == by_rounds) {
    fail(path, "exactly one of max_time and max_rounds is required");
  }
  HorizonConfig h;
  h.by_time = by_time;
  if (by_time) {
    h.max_time = get_number(j.at("max_time"), join(path, "max_time"));
    if (!(h.max_time >= 0.0)) fail(join(path, "max_time"), "must be >= 0");
  } else {
    h.max_rounds = get_int(j.at("max_rounds"), join(path, "max_rounds"));
    if (h.max_rounds < 0) fail(join(path, "max_rounds"), "must be >= 0");
  }
  return h;
}

RunConfig parse_run(const json& j, const std::string& path, bool require_policy) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"name", "problem", "workers", "policy", "horizon", "seed", "x0"});
  RunConfig c;
  if (has(j, "name")) c.name = get_string(j.at("name"), join(path, "name"));
  if (!has(j, "problem")) fail(join(path, "problem"), "missing");
  c.problem = parse_problem(j.at("problem"), join(path, "problem"));

  if (!has(j, "workers")) fail(join(path, "workers"), "missing");
  const json& w = j.at("workers");
  if (!w.is_array() || w.empty()) {
    fail(join(path, "workers"), "expected a non-empty array");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    c.workers.push_back(parse_worker_group(w[i], elem(join(path, "workers"), i)));
  }

  if (has(j, "policy")) {
    c.policy = parse_policy(j.at("policy"), join(path, "policy"));
  } else if (require_policy) {
    fail(join(path, "policy"), "missing");
  }

  if (!has(j, "horizon")) fail(join(path, "horizon"), "missing");
  c.horizon = parse_horizon(j.at("horizon"), join(path, "horizon"));

  if (has(j, "seed")) c.seed = get_uint(j.at("seed"), join(path, "seed"));

  if (has(j, "x0")) {
    Vec x0 = get_number_array(j.at("x0"), join(path, "x0"));
    if (x0.size() != c.problem.dim) {
      fail(join(path, "x0"), "length must equal problem.dim");
    }
    c.x0 = std::move(x0);
  }
  return c;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
}

json noise_to_json(const NoiseModel& m) {
  json j;
  switch (m.kind) {
    case NoiseModel::Kind::None:
      j["kind"] = "none";
      break;
    case NoiseModel::Kind::GaussianIid:
      j["kind"] = "gaussian";
      j["scale"] = m.scale;
      break;
    case NoiseModel::Kind::StudentTIid:
      j["kind"] = "student_t";
      j["dof"] = m.dof;
      j["scale"] = m.scale;
      break;
    case NoiseModel::Kind::ParetoIid:
      j["kind"] = "pareto";
      j["shape"] = m.shape;
      j["scale"] = m.scale;
      break;
    case NoiseModel::Kind::BernoulliGate:
      j["kind"] = "gate";
      j["q"] = m.gate_prob;
      break;
  }
  return j;
}

json problem_to_json(const ProblemConfig& p) {
  json j;
  j["dim"] = p.dim;
  j["noise"] = noise_to_json(p.noise);
  if (p.kind == ProblemConfig::Kind::Quadratic) {
    j["kind"] = "quadratic";
    j["build_seed"] = p.build_seed;
    j["rows"] = p.rows;
    j["ridge"] = p.ridge;
  } else {
    j["kind"] = "chain";
    j["smoothness"] = p.smoothness;
    j["length_scale"] = p.length_scale;
  }
  return j;
}

json worker_group_to_json(const WorkerGroup& g) {
  json j;
  j["count"] = g.count;
  switch (g.profile.kind()) {
    case WorkerProfile::Kind::Fixed:
      j["model"] = "fixed";
      j["tau"] = g.profile.fixed_tau();
      break;
    case WorkerProfile::Kind::Exponential:
      j["model"] = "exponential";
      j["mean"] = g.profile.mean();
      break;
    case WorkerProfile::Kind::ParetoDelay:
      j["model"] = "pareto";
      j["shape"] = g.profile.shape();
      j["mean"] = g.profile.mean();
      break;
    case WorkerProfile::Kind::Universal:
      j["model"] = "universal";
      j["knots"] = g.profile.power().knots();
      j["rates"] = g.profile.power().rates();
      break;
  }
  return j;
}

json policy_to_json(const PolicyConfig& p) {
  json j;
  j["name"] = p.name;
  if (p.eta) j["eta"] = *p.eta;
  if (p.momentum) j["momentum"] = *p.momentum;
  if (p.delay_cut) j["delay_cut"] = *p.delay_cut;
  if (p.batch) j["batch"] = *p.batch;
  if (p.theory) {
    j["theory"] = {{"L", p.theory->L},
                   {"delta", p.theory->delta},
                   {"sigma", p.theory->sigma},
                   {"p", p.theory->p},
                   {"eps", p.theory->eps}};
  }
  return j;
}

json horizon_to_json(const HorizonConfig& h) {
  json j;
  if (h.by_time) {
    j["max_time"] = h.max_time;
  } else {
    j["max_rounds"] = h.max_rounds;
  }
  return j;
}

json run_to_json(const RunConfig& c, bool with_policy_and_seed) {
  json j;
  j["name"] = c.name;
  j["problem"] = problem_to_json(c.problem);
  json w = json::array();
  for (const auto& g : c.workers) w.push_back(worker_group_to_json(g));
  j["workers"] = w;
  if (with_policy_and_seed) {
    j["policy"] = policy_to_json(c.policy);
    j["seed"] = c.seed;
  }
  j["horizon"] = horizon_to_json(c.horizon);
  if (c.x0) j["x0"] = *c.x0;
  return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  return parse_run(parse_text(json_text), "", /*require_policy=*/true);
}

SweepConfig parse_sweep_config(const std::string& json_text) {
  const json j = parse_text(json_text);
  require_object(j, "");
  reject_unknown(j, "", {"base", "policies", "seeds", "time_bins"});
  SweepConfig s;
  if (!has(j, "base")) fail("base", "missing");
  s.base = parse_run(j.at("base"), "base", /*require_policy=*/false);
  if (!s.base.horizon.by_time) {
    fail("base.horizon", "sweep requires a max_time horizon");
  }

  if (!has(j, "policies")) fail("policies", "missing");
  const json& pol = j.at("policies");
  if (!pol.is_array() || pol.empty()) fail("policies", "expected a non-empty array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < pol.size(); ++i) {
    s.policies.push_back(parse_policy(pol[i], elem("policies", i)));
    // Trace files and aggregation rows are keyed by name alone.
    if (!seen.insert(s.policies.back().name).second) {
      fail(join(elem("policies", i), "name"), "duplicate policy name");
    }
  }

  if (!has(j, "seeds")) fail("seeds", "missing");
  const json& seeds = j.at("seeds");
  if (!seeds.is_array() || seeds.empty()) fail("seeds", "expected a non-empty array");
  std::set<std::uint64_t> seen_seeds;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    s.seeds.push_back(get_uint(seeds[i], elem("seeds", i)));
    if (!seen_seeds.insert(s.seeds.back()).second) {
      fail(elem("seeds", i), "duplicate seed");
    }
  }

  if (has(j, "time_bins")) {
    const std::int64_t b = get_int(j.at("time_bins"), "time_bins");
    if (b < 1) fail("time_bins", "must be >= 1");
    s.time_bins = static_cast<std::size_t>(b);
  }
  return s;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

std::string serialize_run_config(const RunConfig& c) {
  return run_to_json(c, /*with_policy_and_seed=*/true).dump(2) + "\n";
}

std::string serialize_sweep_config(const SweepConfig& c) {
  json j;
  j["base"] = run_to_json(c.base, /*with_policy_and_seed=*/false);
  json pol = json::array();
  for (const auto& p : c.policies) pol.push_back(policy_to_json(p));
  j["policies"] = pol;
  j["seeds"] = c.seeds;
  j["time_bins"] = c.time_bins;
  return j.dump(2) + "\n";
}

}  // namespace ransim
