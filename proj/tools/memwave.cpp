// memwave: command-line driver for simulations, condition maps, iteration sequences and the
// invariant suite. Exit status: 0 ok, 1 failed invariants, 2 invalid input, 3 numerical failure.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "memwave/config.hpp"
#include "memwave/error.hpp"
#include "memwave/exponents.hpp"
#include "memwave/io.hpp"
#include "memwave/iteration.hpp"
#include "memwave/observables.hpp"
#include "memwave/rational.hpp"
#include "memwave/verify.hpp"

namespace {

using namespace memwave;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = "memwave_out";
  int parallel = 1;
  int ladder = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(io::OutputDir& out, const Options& opt, const ResolvedConfig& rc) {
  json m;
  m["tool"] = "memwave";
  m["version"] = kToolVersion;
  m["command"] = opt.command;
  m["config"] = rc.echo();
  m["warnings"] = rc.warnings;
  out.write_text("manifest.json", io::dump_json(m));
  out.write_text("timestamp.txt", utc_timestamp() + "\n");
}

// A run without the nonlinearity that stops before t_max is a numerical failure.
bool numerical_failure(const SimulationResult& run, const SystemConfig& cfg) {
  return run.trigger != Trigger::ReachedTmax && !cfg.forcing;
}

int cmd_simulate(const Options& opt, const ResolvedConfig& rc, io::OutputDir& out) {
  const SystemConfig& cfg = rc.system;
  cfg.validate();
  const SimulationResult run = run_simulation(cfg);
  {
    auto os = out.open("trace.csv");
    io::write_trace_csv(os, run.trace);
  }
  const BlowupVerdict v = detect_blowup(run, cfg, rc.blowup_rate);
  json verdict = io::verdict_json(v);
  verdict["max_halo_leak"] = run.max_halo_leak;
  verdict["leak_time"] = run.final_state.leak_time;
  verdict["leak_radius"] = run.final_state.leak_radius;
  out.write_text("verdict.json", io::dump_json(verdict));
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshots/snapshot_%03zu.bin", i);
    auto os = out.open(name, true);
    io::write_snapshot(os, cfg.params.n, cfg.grid.dr, run.snapshots[i]);
  }

  if (opt.ladder > 1) {
    std::vector<SimulationResult> levels(static_cast<std::size_t>(opt.ladder));
    std::vector<SystemConfig> cfgs(levels.size(), cfg);
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
      cfgs[k].grid.dr = cfg.grid.dr / static_cast<double>(1u << k);
      cfgs[k].snapshot_times.clear();
    }
    const int workers = std::max(1, std::min<int>(opt.parallel, opt.ladder));
    std::vector<std::thread> pool;
    std::vector<std::string> failures(levels.size());
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = static_cast<std::size_t>(w); k < levels.size(); k += static_cast<std::size_t>(workers)) {
          try {
            levels[k] = run_simulation(cfgs[k]);
          } catch (const std::exception& e) {
            failures[k] = e.what();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
      if (!f.empty()) throw NumericalError("resolution ladder: " + f);
    auto os = out.open("ladder.csv");
    os << "level,dr,dt,t_stop,trigger,blew_up,T_estimate,maxnorm_u_final,U_final\n";
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const BlowupVerdict lv = detect_blowup(levels[k], cfgs[k], rc.blowup_rate);
      const TraceRow& last = levels[k].trace.rows.back();
      os << k << ',' << io::fmt17(cfgs[k].grid.dr) << ',' << io::fmt17(cfgs[k].dt()) << ','
         << io::fmt17(levels[k].t_stop) << ',' << to_string(levels[k].trigger) << ',' << (lv.blew_up ? 1 : 0) << ','
         << (lv.T_estimate ? io::fmt17(*lv.T_estimate) : std::string("nan")) << ',' << io::fmt17(last.maxnorm_u)
         << ',' << io::fmt17(last.U) << '\n';
      auto ts = out.open("ladder/level_" + std::to_string(k) + "/trace.csv");
      io::write_trace_csv(ts, levels[k].trace);
      if (numerical_failure(levels[k], cfgs[k])) return 3;
    }
  }
  if (numerical_failure(run, cfg)) {
    std::cerr << "memwave: linear run stopped by " << to_string(run.trigger) << "\n";
    return 3;
  }
  std::cout << "trigger " << to_string(run.trigger) << " at t = " << run.t_stop;
  if (v.T_estimate) std::cout << ", T_estimate " << *v.T_estimate;
  std::cout << '\n';
  return 0;
}

json decay_json(const MemoryKernel& g) {
  const DecayClass d = classify_decay(g);
  json j = {{"family", g.name()}, {"decay", to_string(d.tag)}, {"t0", d.t0}};
  j["slope"] = std::isfinite(d.slope) ? json(d.slope) : json(nullptr);
  return j;
}

int cmd_classify(const ResolvedConfig& rc, io::OutputDir& out) {
  const ProblemParams& pr = rc.system.params;
  const MemoryKernel &g1 = rc.system.g1, &g2 = rc.system.g2;
  const ConditionVerdict v = check_condition(pr, g1, g2);
  json j;
  j["branch"] = to_string(v.branch);
  j["satisfied"] = v.satisfied;
  j["margin"] = v.margin;
  j["critical"] = v.critical;
  j["sobolev_warning"] = v.sobolev_warning;
  j["witness_times"] = v.witness_times;
  j["alpha_w"] = alpha_w(pr.p, pr.q);
  j["threshold"] = (pr.n - 1) / 2.0;
  j["strauss_exponent"] = std::isfinite(strauss_exponent(pr.n)) ? json(strauss_exponent(pr.n)) : json(nullptr);
  if (pr.gamma1 && pr.gamma2) j["alpha_wm"] = alpha_wm(pr.p, pr.q, *pr.gamma1, *pr.gamma2);
  j["kernels"] = {{"g1", decay_json(g1)}, {"g2", decay_json(g2)}};
  if (v.branch != Branch::Unsupported) {
    const IterationCase c = v.branch == Branch::SlowSlow ? IterationCase::Case1 : IterationCase::Case2;
    const DivergenceReport d = divergence_certificate(c, pr.p, pr.q, pr.n, g1, g2);
    j["certificate"] = {{"case", c == IterationCase::Case1 ? 1 : 2},
                        {"t_exponent_u", d.t_exponent_u},
                        {"t_exponent_v", d.t_exponent_v},
                        {"t_exponent", d.t_exponent},
                        {"effective_exponent", d.effective_exponent},
                        {"first_time", d.first_time ? json(*d.first_time) : json(nullptr)},
                        {"component", d.component}};
  }
  out.write_text("condition.json", io::dump_json(j));

  auto os = out.open("classify.csv");
  os << "t,log_gap\n";
  if (v.branch == Branch::SlowSlow) {
    const MemoryKernel m1 = minorant(g1), m2 = minorant(g2);
    for (double t : log_grid(1.0, 1e6, 61)) os << io::fmt17(t) << ',' << io::fmt17(slow_condition_log_gap(pr, m1, m2, t)) << '\n';
  }
  std::cout << to_string(v.branch) << (v.satisfied ? " satisfied" : " not satisfied") << ", margin " << v.margin
            << '\n';
  return 0;
}

int cmd_sweep(const Options& opt, const ResolvedConfig& rc, io::OutputDir& out) {
  const SweepSpec& s = rc.sweep;
  SweepKernels k = SweepKernels::fast();
  if (s.kernels == "riemann_liouville") k = SweepKernels::riemann_liouville(s.gamma1, s.gamma2);
  if (s.kernels == "general") k = SweepKernels::general(rc.system.g1, rc.system.g2);
  const RegionMap map = sweep_region(s.n, k, s.p_range, s.q_range, s.p_resolution, s.q_resolution, opt.parallel,
                                     s.r_depth);
  {
    auto os = out.open("region.csv");
    io::write_region_csv(os, map);
  }
  std::size_t satisfied = 0;
  for (const auto& c : map.cells) satisfied += c.satisfied ? 1 : 0;
  out.write_text("sweep.json", io::dump_json({{"cells", map.cells.size()},
                                              {"satisfied", satisfied},
                                              {"p_resolution", map.p_resolution},
                                              {"q_resolution", map.q_resolution}}));
  std::cout << map.cells.size() << " cells, " << satisfied << " satisfied\n";
  return 0;
}

template <class S>
json write_sequences(const SequenceSpec& sq, const S& p, const S& q, io::OutputDir& out) {
  long double worst = 0;
  std::ostringstream csv;
  if (sq.which == 1) {
    const auto s = case1_recursion(p, q, sq.n, sq.j_max, sq.case1);
    io::write_case1_csv(csv, s);
    for (int j = 1; j <= sq.j_max; ++j) worst = std::max(worst, case1_agreement(s, j));
  } else {
    const auto s = case2_recursion(p, q, sq.n, sq.j_max, sq.case2);
    io::write_case2_csv(csv, s);
    for (int j = 1; j <= sq.j_max; ++j) worst = std::max(worst, case2_agreement(s, j));
  }
  out.write_text("sequences.csv", csv.str());
  return {{"max_closed_form_deviation", static_cast<double>(worst)}};
}

int cmd_sequences(const ResolvedConfig& rc, io::OutputDir& out) {
  const SequenceSpec& sq = rc.sequences;
  json summary = sq.exact ? write_sequences(sq, rational_from_decimal(sq.p), rational_from_decimal(sq.q), out)
                          : write_sequences(sq, std::stold(sq.p), std::stold(sq.q), out);
  summary["case"] = sq.which;
  summary["n"] = sq.n;
  summary["p"] = sq.p;
  summary["q"] = sq.q;
  summary["j_max"] = sq.j_max;
  summary["arithmetic"] = sq.exact ? "exact_rational" : "long_double";
  out.write_text("summary.json", io::dump_json(summary));

  const double p = std::stod(sq.p), q = std::stod(sq.q);
  json th;
  try {
    const auto sl = slicing_sequence<long double>(p * q, std::max(sq.j_max, 60));
    const IndexThresholds t = index_thresholds(p, q, sq.t0, static_cast<double>(sl.L_estimate), rc.system.g1,
                                               rc.system.g2, sq.placeholders);
    th = {{"j0", t.j0}, {"j1", t.j1}, {"j1_t", t.j1_t}, {"j2", t.j2}, {"jm", t.jm},
          {"L_estimate", static_cast<double>(sl.L_estimate)}, {"t0", sq.t0}};
  } catch (const std::exception& e) {
    th = {{"error", e.what()}};
  }
  out.write_text("thresholds.json", io::dump_json(th));
  std::cout << "case " << sq.which << ", " << sq.j_max << " terms, max closed-form deviation "
            << summary["max_closed_form_deviation"].get<double>() << '\n';
  return 0;
}

int cmd_verify(const ResolvedConfig& rc, io::OutputDir& out) {
  const std::vector<CheckResult> checks = run_invariant_suite(rc);
  json j = json::array();
  bool all = true;
  for (const auto& c : checks) {
    j.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.passed;
  }
  out.write_text("verify.json", io::dump_json(j));
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memwave: wave equations with memory nonlinearities"};
  app.require_subcommand(1, 1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "run the radial solver and write the functional trace"},
      {"classify", "evaluate the blow-up condition for the configured exponents and kernels"},
      {"sweep", "map the condition over a (p, q) grid"},
      {"sequences", "generate the iteration exponent sequences and index thresholds"},
      {"verify", "run the invariant suite"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--parallel", opt.parallel, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--resolution-ladder", opt.ladder, "number of mesh halvings to run (simulate)")
        ->check(CLI::Range(1, 8));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    const ResolvedConfig rc = validate_config(opt.config_path.empty() ? std::string() : read_file(opt.config_path));
    for (const auto& w : rc.warnings) std::cerr << "warning: " << w << '\n';
    io::OutputDir out(opt.out_dir);
    write_manifest(out, opt, rc);
    int status = 0;
    if (opt.command == "simulate") status = cmd_simulate(opt, rc, out);
    if (opt.command == "classify") status = cmd_classify(rc, out);
    if (opt.command == "sweep") status = cmd_sweep(opt, rc, out);
    if (opt.command == "sequences") status = cmd_sequences(rc, out);
    if (opt.command == "verify") status = cmd_verify(rc, out);
    out.write_index();
    return status;
  } catch (const ConfigValidationError& e) {
    std::cerr << "memwave: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "memwave: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "memwave: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "memwave: unsupported request: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "memwave: error: " << e.what() << '\n';
    return 3;
  }
}
