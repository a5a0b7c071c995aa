#include "ransim/csvio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace ransim {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "time_s,k,grad_norm,f_gap,accepted,discarded,policy,seed\n";
  const std::string tail = "," + trace.summary.policy + "," +
                           std::to_string(trace.summary.seed) + "\n";
  for (const TraceRow& r : trace.rows) {
    out << format_double(r.time_s) << ',' << r.k << ','
        << format_double(r.grad_norm) << ',' << format_double(r.f_gap) << ','
        << r.accepted << ',' << r.discarded << tail;
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "policy,seed,time_bin,time_s,f_gap,grad_norm,"
         "median_f_gap,q25_f_gap,q75_f_gap\n";
  for (const SweepCell& c : cells) {
    out << c.policy << ',' << c.seed << ',' << c.time_bin << ','
        << format_double(c.time_s) << ',' << format_double(c.f_gap) << ','
        << format_double(c.grad_norm) << ',' << format_double(c.median_f_gap)
        << ',' << format_double(c.q25_f_gap) << ','
        << format_double(c.q75_f_gap) << '\n';
  }
}

namespace {

void kv(std::ostream& out, const char* key, const std::string& value) {
  out << key << ',' << value << '\n';
}

}  // namespace

void write_bounds_csv(std::ostream& out, const BoundsReport& r) {
  if (r.taus.empty()) throw std::invalid_argument("csv: bounds report has no workers");
  out << "key,value\n";
  kv(out, "L", format_double(r.L));
  kv(out, "delta", format_double(r.delta));
  kv(out, "sigma", format_double(r.sigma));
  kv(out, "p", format_double(r.p));
  kv(out, "eps", format_double(r.eps));
  kv(out, "n_workers", std::to_string(r.taus.size()));
  const auto [mn, mx] = std::minmax_element(r.taus.begin(), r.taus.end());
  kv(out, "tau_min", format_double(*mn));
  kv(out, "tau_max", format_double(*mx));
  kv(out, "alpha", format_double(r.theory.alpha));
  kv(out, "beta", format_double(r.theory.beta));
  kv(out, "eta", format_double(r.theory.eta));
  kv(out, "delay_cut", std::to_string(r.theory.delay_cut));
  kv(out, "rounds", std::to_string(r.theory.rounds));
  kv(out, "t_at_cut", format_double(r.t_at_cut));
  kv(out, "upper_in_regime", r.upper_in_regime ? "1" : "0");
  kv(out, "upper_fixed", format_double(r.upper_fixed));
  kv(out, "lower_in_regime", r.lower_in_regime ? "1" : "0");
  kv(out, "lower_fixed", format_double(r.lower_fixed));
  kv(out, "epochs", std::to_string(r.epochs));
  kv(out, "T_final", format_double(r.recursion.t_final));
  kv(out, "T_blocked_at", std::to_string(r.recursion.blocked_at));
  for (std::size_t i = 0; i < r.recursion.times.size(); ++i) {
    kv(out, ("T_" + std::to_string(i + 1)).c_str(),
       format_double(r.recursion.times[i]));
  }
  kv(out, "lb_k_tilde", std::to_string(r.universal_lb.k_tilde));
  kv(out, "lb_epoch_target", std::to_string(r.universal_lb.epoch_target));
  kv(out, "lb_gate_prob", format_double(r.universal_lb.gate_prob));
  kv(out, "lb_time", format_double(r.universal_lb.time));
}

std::string trace_csv_name(const std::string& policy, std::uint64_t seed) {
  return "trace_" + policy + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace ransim
