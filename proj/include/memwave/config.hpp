#pragma once

// JSON experiment configuration. Every section is optional; missing keys take the defaults
// echoed by ResolvedConfig::echo(). Unknown keys are errors reported with their JSON path.

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memwave/error.hpp"
#include "memwave/exponents.hpp"
#include "memwave/iteration.hpp"
#include "memwave/kernels.hpp"
#include "memwave/observables.hpp"
#include "memwave/profiles.hpp"
#include "memwave/solver.hpp"

namespace memwave {

using nlohmann::json;

/// All violations found in one pass.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<std::string> errors)
      : ConfigError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string out = "invalid configuration:";
    for (const auto& s : e) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> errors_;
};

struct SweepSpec {
  int n = 3;
  Range p_range{1.05, 3.0};
  Range q_range{1.05, 3.0};
  int p_resolution = 20;
  int q_resolution = 20;
  std::string kernels = "fast";  // fast | riemann_liouville | general
  double gamma1 = 0.5, gamma2 = 0.5;
  int r_depth = 0;
};

struct SequenceSpec {
  int which = 1;  // Case 1 or Case 2
  int n = 3;
  std::string p = "2", q = "3";
  int j_max = 25;
  bool exact = true;
  Case1Seeds case1;
  Case2Seeds case2;
  ThresholdPlaceholders placeholders;
  double t0 = 1.0;
};

struct ResolvedConfig {
  SystemConfig system;
  BlowupRate blowup_rate = BlowupRate::MemoryOde;
  SweepSpec sweep;
  SequenceSpec sequences;
  json g1_spec, g2_spec;
  std::vector<std::string> warnings;

  json echo() const;
};

namespace detail {

class Reader {
 public:
  std::vector<std::string> errors, warnings;

  void known_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      errors.push_back(path + ": expected an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        errors.push_back(path + "/" + it.key() + ": unknown key (allowed: " + list + ")");
      }
  }

  json section(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) return json::object();
    const json& s = obj.at(key);
    if (!s.is_object()) {
      errors.push_back(path + "/" + key + ": expected an object");
      return json::object();
    }
    return s;
  }

  double number(const json& obj, const std::string& key, const std::string& path, double dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      errors.push_back(path + "/" + key + ": expected a number");
      return dflt;
    }
    return v.get<double>();
  }

  int integer(const json& obj, const std::string& key, const std::string& path, int dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(path + "/" + key + ": expected an integer");
      return dflt;
    }
    return v.get<int>();
  }

  bool boolean(const json& obj, const std::string& key, const std::string& path, bool dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      errors.push_back(path + "/" + key + ": expected true or false");
      return dflt;
    }
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& path, const std::string& dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      errors.push_back(path + "/" + key + ": expected a string");
      return dflt;
    }
    return v.get<std::string>();
  }

  /// Number or decimal string, kept as its decimal text for exact parsing.
  std::string decimal(const json& obj, const std::string& key, const std::string& path, const std::string& dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    errors.push_back(path + "/" + key + ": expected a number or decimal string");
    return dflt;
  }

  Range range(const json& obj, const std::string& key, const std::string& path, Range dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      errors.push_back(path + "/" + key + ": expected [lo, hi]");
      return dflt;
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  /// Builds the kernel and returns its fully defaulted spec.
  std::optional<MemoryKernel> kernel(const json& spec, const std::string& path, json& echo) {
    if (!spec.is_object()) {
      errors.push_back(path + ": expected an object");
      return std::nullopt;
    }
    const std::string fam = string(spec, "family", path, "constant");
    echo = json::object();
    echo["family"] = fam;
    try {
      if (fam == "riemann_liouville") {
        known_keys(spec, path, {"family", "gamma", "scale"});
        const double g = number(spec, "gamma", path, 0.5), s = number(spec, "scale", path, 1.0);
        echo["gamma"] = g;
        echo["scale"] = s;
        if (!(g > 0.0 && g < 1.0)) {
          errors.push_back(path + "/gamma: Riemann-Liouville gamma must lie in (0, 1), got " + fmt(g));
          return std::nullopt;
        }
        return MemoryKernel::riemann_liouville(g, s);
      }
      if (fam == "polynomial_shifted") {
        known_keys(spec, path, {"family", "gamma"});
        const double g = number(spec, "gamma", path, 1.0);
        echo["gamma"] = g;
        return MemoryKernel::polynomial_shifted(g);
      }
      if (fam == "exponential") {
        known_keys(spec, path, {"family", "beta"});
        const double b = number(spec, "beta", path, 1.0);
        echo["beta"] = b;
        return MemoryKernel::exponential(b);
      }
      if (fam == "iterated_exponential") {
        known_keys(spec, path, {"family", "depth", "c"});
        const int d = integer(spec, "depth", path, 1);
        const double c = number(spec, "c", path, 1.0);
        echo["depth"] = d;
        echo["c"] = c;
        return MemoryKernel::iterated_exponential(d, c);
      }
      if (fam == "oscillating_polynomial") {
        known_keys(spec, path, {"family", "gamma"});
        const double g = number(spec, "gamma", path, 0.5);
        echo["gamma"] = g;
        return MemoryKernel::oscillating_polynomial(g);
      }
      if (fam == "constant") {
        known_keys(spec, path, {"family", "c"});
        const double c = number(spec, "c", path, 1.0);
        echo["c"] = c;
        return MemoryKernel::constant(c);
      }
      if (fam == "custom") {
        known_keys(spec, path, {"family", "t", "g"});
        std::vector<double> t, g;
        if (!spec.contains("t") || !spec.contains("g") || !spec["t"].is_array() || !spec["g"].is_array()) {
          errors.push_back(path + ": custom kernels need arrays 't' and 'g'");
          return std::nullopt;
        }
        for (const auto& x : spec["t"]) t.push_back(x.get<double>());
        for (const auto& x : spec["g"]) g.push_back(x.get<double>());
        echo["t"] = t;
        echo["g"] = g;
        return MemoryKernel::custom(t, g);
      }
      errors.push_back(path + "/family: unknown kernel family '" + fam +
                       "' (expected riemann_liouville, polynomial_shifted, exponential, iterated_exponential, "
                       "oscillating_polynomial, constant, custom)");
    } catch (const std::exception& e) {
      errors.push_back(path + ": " + e.what());
    } catch (...) {
      errors.push_back(path + ": invalid kernel");
    }
    return std::nullopt;
  }

  Profile profile(const json& obj, const std::string& key, const std::string& path, Profile dflt) {
    if (!obj.is_object() || !obj.contains(key)) return dflt;
    const json& spec = obj.at(key);
    const std::string p = path + "/" + key;
    known_keys(spec, p, {"shape", "amplitude", "radius"});
    Profile pr;
    try {
      pr.shape = profile_shape_from_string(string(spec, "shape", p, to_string(dflt.shape)));
    } catch (const std::exception& e) {
      errors.push_back(p + "/shape: " + e.what());
    }
    pr.amplitude = number(spec, "amplitude", p, dflt.amplitude);
    pr.radius = number(spec, "radius", p, dflt.radius);
    if (pr.shape != ProfileShape::Zero && !(pr.radius > 0.0))
      errors.push_back(p + "/radius: support radius R must be > 0, got " + fmt(pr.radius));
    if (pr.amplitude < 0.0)
      warnings.push_back(p + "/amplitude: negative amplitude; blow-up checks assume nonnegative data");
    return pr;
  }

  static std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  }
};

inline json profile_json(const Profile& p) {
  return {{"shape", to_string(p.shape)}, {"amplitude", p.amplitude}, {"radius", p.radius}};
}

inline json kernel_default_json() { return {{"family", "constant"}, {"c", 1.0}}; }

}  // namespace detail

/// Parse and validate; throws ConfigValidationError listing every violation.
inline ResolvedConfig validate_config(const std::string& text) {
  json root;
  try {
    root = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigValidationError({std::string("/: not valid JSON: ") + e.what()});
  }
  detail::Reader rd;
  ResolvedConfig rc;
  rd.known_keys(root, "", {"params", "kernels", "initial_data", "simulation", "sweep", "sequences"});

  const json params = rd.section(root, "params", "");
  rd.known_keys(params, "/params", {"n", "p", "q", "gamma1", "gamma2", "r_depth"});
  ProblemParams& pr = rc.system.params;
  pr.n = rd.integer(params, "n", "/params", 1);
  pr.p = rd.number(params, "p", "/params", 2.0);
  pr.q = rd.number(params, "q", "/params", 2.0);
  if (params.contains("gamma1")) pr.gamma1 = rd.number(params, "gamma1", "/params", 0.5);
  if (params.contains("gamma2")) pr.gamma2 = rd.number(params, "gamma2", "/params", 0.5);
  pr.r_depth = rd.integer(params, "r_depth", "/params", 0);
  if (pr.n < 1) rd.errors.push_back("/params/n: dimension must be >= 1, got " + std::to_string(pr.n));
  if (!(pr.p > 1.0)) rd.errors.push_back("/params/p: must exceed 1, got " + detail::Reader::fmt(pr.p));
  if (!(pr.q > 1.0)) rd.errors.push_back("/params/q: must exceed 1, got " + detail::Reader::fmt(pr.q));
  for (const char* gk : {"gamma1", "gamma2"}) {
    const auto& g = std::string(gk) == "gamma1" ? pr.gamma1 : pr.gamma2;
    if (g && !(*g > 0.0 && *g < 1.0))
      rd.errors.push_back(std::string("/params/") + gk + ": Riemann-Liouville gamma must lie in (0, 1), got " +
                          detail::Reader::fmt(*g));
  }
  if (pr.r_depth < 0 || pr.r_depth > 4) rd.errors.push_back("/params/r_depth: must lie in [0, 4]");
  if (pr.n >= 3) {
    const double bound = static_cast<double>(pr.n) / (pr.n - 2);
    for (auto [name, val] : {std::pair{"p", pr.p}, {"q", pr.q}})
      if (val > bound)
        rd.warnings.push_back(std::string("/params/") + name + ": " + detail::Reader::fmt(val) +
                              " exceeds the Sobolev bound n/(n-2) = " + detail::Reader::fmt(bound) +
                              " for n = " + std::to_string(pr.n) + "; local existence needs p, q <= n/(n-2)");
  }

  const json kernels = rd.section(root, "kernels", "");
  rd.known_keys(kernels, "/kernels", {"g1", "g2"});
  for (int which = 1; which <= 2; ++which) {
    const std::string key = which == 1 ? "g1" : "g2";
    json& echo = which == 1 ? rc.g1_spec : rc.g2_spec;
    if (kernels.contains(key)) {
      if (auto k = rd.kernel(kernels.at(key), "/kernels/" + key, echo))
        (which == 1 ? rc.system.g1 : rc.system.g2) = *k;
    } else {
      echo = detail::kernel_default_json();
    }
  }
  // Riemann-Liouville kernels fix the gammas unless given explicitly
  if (!pr.gamma1 && rc.system.g1.family() == KernelFamily::RiemannLiouville)
    pr.gamma1 = std::get<kernel_params::RiemannLiouville>(rc.system.g1.params()).gamma;
  if (!pr.gamma2 && rc.system.g2.family() == KernelFamily::RiemannLiouville)
    pr.gamma2 = std::get<kernel_params::RiemannLiouville>(rc.system.g2.params()).gamma;

  const json data = rd.section(root, "initial_data", "");
  rd.known_keys(data, "/initial_data", {"u0", "u1", "v0", "v1"});
  const Profile bump = Profile::cosine_bump(1.0, 1.0);
  rc.system.data.u0 = rd.profile(data, "u0", "/initial_data", bump);
  rc.system.data.u1 = rd.profile(data, "u1", "/initial_data", bump);
  rc.system.data.v0 = rd.profile(data, "v0", "/initial_data", bump);
  rc.system.data.v1 = rd.profile(data, "v1", "/initial_data", bump);

  const json sim = rd.section(root, "simulation", "");
  rd.known_keys(sim, "/simulation", {"mode", "t_max", "dr", "cfl", "forcing", "truncate_tail", "blowup_threshold",
                                     "record_every", "snapshot_times", "blowup_rate"});
  SystemConfig& sc = rc.system;
  try {
    sc.mode = mode_from_string(rd.string(sim, "mode", "/simulation", "coupled"));
  } catch (const std::exception& e) {
    rd.errors.push_back(std::string("/simulation/mode: ") + e.what());
  }
  sc.t_max = rd.number(sim, "t_max", "/simulation", 2.0);
  sc.grid.dr = rd.number(sim, "dr", "/simulation", 0.01);
  sc.grid.cfl = rd.number(sim, "cfl", "/simulation", 0.9);
  sc.forcing = rd.boolean(sim, "forcing", "/simulation", true);
  sc.truncate_tail = rd.boolean(sim, "truncate_tail", "/simulation", false);
  sc.blowup_threshold = rd.number(sim, "blowup_threshold", "/simulation", 1e6);
  sc.record_every = rd.integer(sim, "record_every", "/simulation", 1);
  if (sim.contains("snapshot_times")) {
    if (!sim["snapshot_times"].is_array())
      rd.errors.push_back("/simulation/snapshot_times: expected an array of times");
    else
      for (const auto& x : sim["snapshot_times"]) {
        if (!x.is_number())
          rd.errors.push_back("/simulation/snapshot_times: entries must be numbers");
        else
          sc.snapshot_times.push_back(x.get<double>());
      }
  }
  try {
    rc.blowup_rate = blowup_rate_from_string(rd.string(sim, "blowup_rate", "/simulation", "memory_ode"));
  } catch (const std::exception& e) {
    rd.errors.push_back(std::string("/simulation/blowup_rate: ") + e.what());
  }
  if (!(sc.t_max > 0.0)) rd.errors.push_back("/simulation/t_max: must be > 0");
  if (!(sc.grid.dr > 0.0)) rd.errors.push_back("/simulation/dr: must be > 0");
  if (!(sc.grid.cfl > 0.0 && sc.grid.cfl < 1.0))
    rd.errors.push_back("/simulation/cfl: CFL number must lie in (0, 1), got " + detail::Reader::fmt(sc.grid.cfl));
  if (sc.record_every < 1) rd.errors.push_back("/simulation/record_every: must be >= 1");
  if (sc.mode == Mode::MGT && sc.g1.family() != KernelFamily::Exponential)
    rd.errors.push_back("/kernels/g1: MGT mode requires the exponential kernel");
  if (pr.n > 3) rd.warnings.push_back("/params/n: the radial solver covers n <= 3; simulate will reject this");

  const json sw = rd.section(root, "sweep", "");
  rd.known_keys(sw, "/sweep", {"n", "p_range", "q_range", "p_resolution", "q_resolution", "kernels", "gamma1", "gamma2",
                               "r_depth"});
  SweepSpec& ss = rc.sweep;
  ss.n = rd.integer(sw, "n", "/sweep", 3);
  ss.p_range = rd.range(sw, "p_range", "/sweep", {1.05, 3.0});
  ss.q_range = rd.range(sw, "q_range", "/sweep", {1.05, 3.0});
  ss.p_resolution = rd.integer(sw, "p_resolution", "/sweep", 20);
  ss.q_resolution = rd.integer(sw, "q_resolution", "/sweep", 20);
  ss.kernels = rd.string(sw, "kernels", "/sweep", "fast");
  ss.gamma1 = rd.number(sw, "gamma1", "/sweep", 0.5);
  ss.gamma2 = rd.number(sw, "gamma2", "/sweep", 0.5);
  ss.r_depth = rd.integer(sw, "r_depth", "/sweep", 0);
  if (ss.kernels != "fast" && ss.kernels != "riemann_liouville" && ss.kernels != "general")
    rd.errors.push_back("/sweep/kernels: expected fast, riemann_liouville or general");
  if (ss.kernels == "riemann_liouville")
    for (auto [name, g] : {std::pair{"gamma1", ss.gamma1}, {"gamma2", ss.gamma2}})
      if (!(g > 0.0 && g < 1.0))
        rd.errors.push_back(std::string("/sweep/") + name + ": Riemann-Liouville gamma must lie in (0, 1), got " +
                            detail::Reader::fmt(g));
  if (ss.p_resolution < 1 || ss.q_resolution < 1) rd.errors.push_back("/sweep: resolutions must be >= 1");

  const json sq = rd.section(root, "sequences", "");
  rd.known_keys(sq, "/sequences", {"case", "n", "p", "q", "j_max", "exact", "seeds", "placeholders", "t0"});
  SequenceSpec& qs = rc.sequences;
  qs.which = rd.integer(sq, "case", "/sequences", 1);
  qs.n = rd.integer(sq, "n", "/sequences", 3);
  qs.p = rd.decimal(sq, "p", "/sequences", "2");
  qs.q = rd.decimal(sq, "q", "/sequences", "3");
  qs.j_max = rd.integer(sq, "j_max", "/sequences", 25);
  qs.exact = rd.boolean(sq, "exact", "/sequences", true);
  qs.t0 = rd.number(sq, "t0", "/sequences", 1.0);
  if (qs.which != 1 && qs.which != 2) rd.errors.push_back("/sequences/case: expected 1 or 2");
  if (qs.j_max < 1) rd.errors.push_back("/sequences/j_max: must be >= 1");
  for (auto [name, txt] : {std::pair{"p", qs.p}, {"q", qs.q}}) {
    try {
      if (!(rational_from_decimal(txt) > 1)) rd.errors.push_back(std::string("/sequences/") + name + ": must exceed 1");
    } catch (const std::exception& e) {
      rd.errors.push_back(std::string("/sequences/") + name + ": " + e.what());
    }
  }
  const json seeds = rd.section(sq, "seeds", "/sequences");
  rd.known_keys(seeds, "/sequences/seeds", {"log_D1", "log_Dt1", "log_C0", "log_Ct0", "log_C3", "log_Ct3", "log_Q1",
                                            "log_Qt1"});
  qs.case1.log_D1 = rd.number(seeds, "log_D1", "/sequences/seeds", 0.0);
  qs.case1.log_Dt1 = rd.number(seeds, "log_Dt1", "/sequences/seeds", 0.0);
  qs.case1.log_C0 = qs.case2.log_C0 = rd.number(seeds, "log_C0", "/sequences/seeds", 0.0);
  qs.case1.log_Ct0 = qs.case2.log_Ct0 = rd.number(seeds, "log_Ct0", "/sequences/seeds", 0.0);
  qs.case2.log_C3 = rd.number(seeds, "log_C3", "/sequences/seeds", 0.0);
  qs.case2.log_Ct3 = rd.number(seeds, "log_Ct3", "/sequences/seeds", 0.0);
  qs.case2.log_Q1 = rd.number(seeds, "log_Q1", "/sequences/seeds", 0.0);
  qs.case2.log_Qt1 = rd.number(seeds, "log_Qt1", "/sequences/seeds", 0.0);
  const json ph = rd.section(sq, "placeholders", "/sequences");
  rd.known_keys(ph, "/sequences/placeholders", {"log_E0", "log_Et0", "log_E2", "log_Et2"});
  qs.placeholders.log_E0 = rd.number(ph, "log_E0", "/sequences/placeholders", 0.0);
  qs.placeholders.log_Et0 = rd.number(ph, "log_Et0", "/sequences/placeholders", 0.0);
  qs.placeholders.log_E2 = rd.number(ph, "log_E2", "/sequences/placeholders", 0.0);
  qs.placeholders.log_Et2 = rd.number(ph, "log_Et2", "/sequences/placeholders", 0.0);
  qs.case1.log_E0 = qs.placeholders.log_E0;
  qs.case1.log_Et0 = qs.placeholders.log_Et0;
  qs.case2.log_E2 = qs.placeholders.log_E2;
  qs.case2.log_Et2 = qs.placeholders.log_Et2;

  if (!rd.errors.empty()) throw ConfigValidationError(rd.errors);
  rc.warnings = rd.warnings;
  return rc;
}

inline json ResolvedConfig::echo() const {
  const ProblemParams& pr = system.params;
  json params = {{"n", pr.n}, {"p", pr.p}, {"q", pr.q}, {"r_depth", pr.r_depth}};
  if (pr.gamma1) params["gamma1"] = *pr.gamma1;
  if (pr.gamma2) params["gamma2"] = *pr.gamma2;
  json out;
  out["params"] = params;
  out["kernels"] = {{"g1", g1_spec}, {"g2", g2_spec}};
  out["initial_data"] = {{"u0", detail::profile_json(system.data.u0)},
                         {"u1", detail::profile_json(system.data.u1)},
                         {"v0", detail::profile_json(system.data.v0)},
                         {"v1", detail::profile_json(system.data.v1)}};
  out["simulation"] = {{"mode", to_string(system.mode)},
                       {"t_max", system.t_max},
                       {"dr", system.grid.dr},
                       {"cfl", system.grid.cfl},
                       {"forcing", system.forcing},
                       {"truncate_tail", system.truncate_tail},
                       {"blowup_threshold", system.blowup_threshold},
                       {"record_every", system.record_every},
                       {"snapshot_times", system.snapshot_times},
                       {"blowup_rate", to_string(blowup_rate)}};
  out["sweep"] = {{"n", sweep.n},
                  {"p_range", {sweep.p_range.lo, sweep.p_range.hi}},
                  {"q_range", {sweep.q_range.lo, sweep.q_range.hi}},
                  {"p_resolution", sweep.p_resolution},
                  {"q_resolution", sweep.q_resolution},
                  {"kernels", sweep.kernels},
                  {"gamma1", sweep.gamma1},
                  {"gamma2", sweep.gamma2},
                  {"r_depth", sweep.r_depth}};
  out["sequences"] = {{"case", sequences.which},
                      {"n", sequences.n},
                      {"p", sequences.p},
                      {"q", sequences.q},
                      {"j_max", sequences.j_max},
                      {"exact", sequences.exact},
                      {"t0", sequences.t0},
                      {"seeds",
                       {{"log_D1", sequences.case1.log_D1},
                        {"log_Dt1", sequences.case1.log_Dt1},
                        {"log_C0", sequences.case1.log_C0},
                        {"log_Ct0", sequences.case1.log_Ct0},
                        {"log_C3", sequences.case2.log_C3},
                        {"log_Ct3", sequences.case2.log_Ct3},
                        {"log_Q1", sequences.case2.log_Q1},
                        {"log_Qt1", sequences.case2.log_Qt1}}},
                      {"placeholders",
                       {{"log_E0", sequences.placeholders.log_E0},
                        {"log_Et0", sequences.placeholders.log_Et0},
                        {"log_E2", sequences.placeholders.log_E2},
                        {"log_Et2", sequences.placeholders.log_Et2}}}};
  return out;
}

}  // namespace memwave
