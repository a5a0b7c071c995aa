// Command-line driver: single runs, policy/seed sweeps, time-bound tables and
// the invariant suite.  Exit codes: 0 success, 1 validation error, 2 invariant
// failure, 3 simulation guard.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ransim/bounds.hpp"
#include "ransim/config.hpp"
#include "ransim/csvio.hpp"
#include "ransim/engine.hpp"
#include "ransim/runner.hpp"
#include "ransim/selfcheck.hpp"

namespace {

using namespace ransim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitGuard = 3;

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open " + path.string() + " for writing");
  out << bytes;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? "." : dir;
  std::filesystem::create_directories(p);
  return p;
}

void print_summary(const RunSummary& s) {
  std::cout << "policy=" << s.policy << " seed=" << s.seed
            << " final_time=" << format_double(s.final_time)
            << " k=" << s.final_round
            << " grad_norm=" << format_double(s.final_grad_norm)
            << " f_gap=" << format_double(s.final_gap)
            << " accepted=" << s.accepted << " discarded=" << s.discarded
            << " zero_directions=" << s.zero_directions
            << (s.diverged ? " diverged=1" : "") << "\n";
}

std::string render_trace(const RunTrace& trace) {
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
  RunConfig cfg = load_run_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  const auto out = prepare_out_dir(out_dir);
  const RunTrace trace = run_single(cfg, &std::cerr);
  write_file(out / trace_csv_name(trace.summary.policy, trace.summary.seed),
             render_trace(trace));
  print_summary(trace.summary);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const SweepConfig cfg = load_sweep_config(config_path);
  const auto out = prepare_out_dir(out_dir);
  const auto sink = [&](const RunTrace& trace) {
    write_file(out / trace_csv_name(trace.summary.policy, trace.summary.seed),
               render_trace(trace));
    print_summary(trace.summary);
  };
  const SweepResult result = run_sweep(cfg, sink, &std::cerr);
  std::ostringstream ss;
  write_sweep_csv(ss, result.cells);
  write_file(out / "sweep.csv", ss.str());
  std::cout << "sweep: " << result.summaries.size() << " runs, "
            << result.cells.size() << " aggregate rows -> "
            << (out / "sweep.csv").string() << "\n";
  return kExitOk;
}

std::vector<double> parse_taus(const std::string& text) {
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bounds: cannot parse worker time '" + item + "'");
    }
    if (used != item.size()) {
      throw std::invalid_argument("bounds: cannot parse worker time '" + item + "'");
    }
    taus.push_back(v);
  }
  if (taus.empty()) throw std::invalid_argument("bounds: no worker times given");
  return taus;
}

struct BoundsInputs {
  double L = 0.0, delta = 0.0, sigma = 0.0, p = 2.0, eps = 0.0;
  std::vector<double> taus;
};

BoundsInputs load_bounds_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("bounds: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("bounds: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("bounds: expected a JSON object");
  BoundsInputs b;
  for (const char* key : {"L", "delta", "sigma", "p", "eps", "taus"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("bounds: missing field ") + key);
    }
  }
  const auto number = [&](const char* key) {
    if (!j.at(key).is_number()) {
      throw std::invalid_argument(std::string("bounds: field ") + key +
                                  " must be a number");
    }
    return j.at(key).get<double>();
  };
  b.L = number("L");
  b.delta = number("delta");
  b.sigma = number("sigma");
  b.p = number("p");
  b.eps = number("eps");
  if (!j.at("taus").is_array() || j.at("taus").empty()) {
    throw std::invalid_argument("bounds: taus must be a non-empty array");
  }
  for (const auto& t : j.at("taus")) {
    if (!t.is_number()) throw std::invalid_argument("bounds: taus entries must be numbers");
    b.taus.push_back(t.get<double>());
  }
  return b;
}

void print_bounds_table(const BoundsReport& r) {
  const auto row = [](const std::string& key, const std::string& value) {
    std::cout << "  " << key;
    for (std::size_t i = key.size(); i < 22; ++i) std::cout << ' ';
    std::cout << value << "\n";
  };
  std::cout << "inputs\n";
  row("L", format_double(r.L));
  row("delta", format_double(r.delta));
  row("sigma", format_double(r.sigma));
  row("p", format_double(r.p));
  row("eps", format_double(r.eps));
  row("workers", std::to_string(r.taus.size()));
  std::cout << "step-size recipe\n";
  row("alpha", format_double(r.theory.alpha));
  row("beta", format_double(r.theory.beta));
  row("eta", format_double(r.theory.eta));
  row("delay_cut", std::to_string(r.theory.delay_cut));
  row("rounds", std::to_string(r.theory.rounds));
  std::cout << "fixed-speed times\n";
  row("t_at_cut", format_double(r.t_at_cut));
  row("upper", r.upper_in_regime ? format_double(r.upper_fixed)
                                 : std::string("out of regime (eps too coarse)"));
  row("lower", r.lower_in_regime ? format_double(r.lower_fixed)
                                 : std::string("out of regime (eps too coarse)"));
  std::cout << "elastic-rate recursion\n";
  row("epochs", std::to_string(r.epochs));
  row("T_final", format_double(r.recursion.t_final));
  if (r.recursion.blocked_at >= 0) {
    row("blocked_at", std::to_string(r.recursion.blocked_at));
  }
  row("lb_epochs", std::to_string(r.universal_lb.k_tilde));
  row("lb_time", format_double(r.universal_lb.time));
}

int cmd_bounds(const std::string& config_path, std::optional<double> L,
               std::optional<double> delta, std::optional<double> sigma,
               std::optional<double> p, std::optional<double> eps,
               const std::string& taus_text, const std::string& out_dir) {
  BoundsInputs inputs;
  if (!config_path.empty()) {
    if (L || delta || sigma || p || eps || !taus_text.empty()) {
      throw std::invalid_argument("bounds: give either --config or the flag set, not both");
    }
    inputs = load_bounds_config(config_path);
  } else {
    if (!L || !delta || !eps || taus_text.empty()) {
      throw std::invalid_argument(
          "bounds: need --L, --delta, --eps and --taus (or --config)");
    }
    inputs.L = *L;
    inputs.delta = *delta;
    inputs.sigma = sigma.value_or(0.0);
    inputs.p = p.value_or(2.0);
    inputs.eps = *eps;
    inputs.taus = parse_taus(taus_text);
  }
  const BoundsReport report = make_bounds_report(inputs.L, inputs.delta, inputs.sigma,
                                                 inputs.p, inputs.eps, inputs.taus);
  print_bounds_table(report);
  const auto out = prepare_out_dir(out_dir);
  std::ostringstream ss;
  write_bounds_csv(ss, report);
  write_file(out / "bounds.csv", ss.str());
  return kExitOk;
}

int cmd_verify(bool full) {
  const auto results = run_selfchecks(full, &std::cout);
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok) ++failed;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed ("
            << (full ? "full" : "quick") << " scale)\n";
  return failed == 0 ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous optimization simulator and bound calculator"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  run->add_option("config", run_config, "JSON run configuration")->required();
  run->add_option("--out", run_out, "output directory (default .)");
  run->add_option("--seed", run_seed, "override the master seed");

  std::string sweep_config, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run a policy x seed cross product");
  sweep->add_option("config", sweep_config, "JSON sweep configuration")->required();
  sweep->add_option("--out", sweep_out, "output directory (default .)");

  std::string bounds_config, bounds_taus, bounds_out;
  std::optional<double> bL, bDelta, bSigma, bP, bEps;
  auto* bounds = app.add_subcommand("bounds", "evaluate the time-bound formulas");
  bounds->add_option("--config", bounds_config, "JSON file with L, delta, sigma, p, eps, taus");
  bounds->add_option("--L", bL, "smoothness constant");
  bounds->add_option("--delta", bDelta, "initial optimality gap");
  bounds->add_option("--sigma", bSigma, "noise level (default 0)");
  bounds->add_option("--p", bP, "noise moment order in (1, 2] (default 2)");
  bounds->add_option("--eps", bEps, "target stationarity accuracy");
  bounds->add_option("--taus", bounds_taus, "comma-separated worker seconds per gradient");
  bounds->add_option("--out", bounds_out, "output directory (default .)");

  bool verify_quick = false, verify_full = false;
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  auto* qflag = verify->add_flag("--quick", verify_quick, "smoke scale (default)");
  verify->add_flag("--full", verify_full, "certification scale")->excludes(qflag);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_out, run_seed);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
    if (bounds->parsed()) {
      return cmd_bounds(bounds_config, bL, bDelta, bSigma, bP, bEps, bounds_taus,
                        bounds_out);
    }
    if (verify->parsed()) return cmd_verify(verify_full);
  } catch (const SimGuardError& e) {
    std::cerr << "simulation guard: " << e.what() << "\n";
    return kExitGuard;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
