#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memwave/error.hpp"
#include "memwave/exponents.hpp"
#include "memwave/iteration.hpp"
#include "memwave/observables.hpp"

namespace memwave::io {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trace_csv(std::ostream& os, const FunctionalTrace& tr) {
  os << "t,U,V,U0,V0,Lp_v,Lq_u,maxnorm_u,maxnorm_v\n";
  for (const TraceRow& r : tr.rows)
    os << fmt17(r.t) << ',' << fmt17(r.U) << ',' << fmt17(r.V) << ',' << fmt17(r.U0) << ',' << fmt17(r.V0) << ','
       << fmt17(r.Lp_v) << ',' << fmt17(r.Lq_u) << ',' << fmt17(r.maxnorm_u) << ',' << fmt17(r.maxnorm_v) << '\n';
}

inline void write_region_csv(std::ostream& os, const RegionMap& map) {
  os << "p,q,branch,satisfied,margin\n";
  for (const RegionCell& c : map.cells)
    os << fmt17(c.p) << ',' << fmt17(c.q) << ',' << to_string(c.branch) << ',' << (c.satisfied ? 1 : 0) << ','
       << fmt17(c.margin) << '\n';
}

inline std::string fmt17(long double x) { return fmt17(static_cast<double>(x)); }

template <class S>
void write_case1_csv(std::ostream& os, const Case1Sequences<S>& s) {
  os << "j,a,a_t,alpha,alpha_t,b,b_t,beta,beta_t,log_D,log_Dt,log_D_bound,log_Dt_bound,closed_form_agreement\n";
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const auto& t = s.terms[i];
    const int j = static_cast<int>(i) + 1;
    os << j;
    for (const S* x : {&t.a, &t.a_t, &t.alpha, &t.alpha_t, &t.b, &t.b_t, &t.beta, &t.beta_t}) os << ',' << fmt17(to_real(*x));
    os << ',' << fmt17(s.log_D[i]) << ',' << fmt17(s.log_Dt[i]) << ',' << fmt17(s.log_D_bound[i]) << ','
       << fmt17(s.log_Dt_bound[i]) << ',' << fmt17(case1_agreement(s, j)) << '\n';
  }
}

template <class S>
void write_case2_csv(std::ostream& os, const Case2Sequences<S>& s) {
  os << "j,theta,theta_t,sigma,sigma_t,ell,L,log_Q,log_Qt,log_Q_bound,log_Qt_bound,closed_form_agreement\n";
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const auto& t = s.terms[i];
    const int j = static_cast<int>(i) + 1;
    os << j;
    for (const S* x : {&t.theta, &t.theta_t, &t.sigma, &t.sigma_t}) os << ',' << fmt17(to_real(*x));
    os << ',' << fmt17(i < s.ell.size() ? s.ell[i] : NAN) << ',' << fmt17(i < s.L.size() ? s.L[i] : NAN) << ','
       << fmt17(s.log_Q[i]) << ',' << fmt17(s.log_Qt[i]) << ',' << fmt17(s.log_Q_bound[i]) << ','
       << fmt17(s.log_Qt_bound[i]) << ',' << fmt17(case2_agreement(s, j)) << '\n';
  }
}

inline nlohmann::json verdict_json(const BlowupVerdict& v) {
  nlohmann::json j;
  j["blew_up"] = v.blew_up;
  j["t_stop"] = v.t_stop;
  j["T_estimate"] = v.T_estimate ? nlohmann::json(*v.T_estimate) : nlohmann::json(nullptr);
  j["ci_low"] = v.T_estimate ? nlohmann::json(v.ci_low) : nlohmann::json(nullptr);
  j["ci_high"] = v.T_estimate ? nlohmann::json(v.ci_high) : nlohmann::json(nullptr);
  j["trigger"] = to_string(v.trigger);
  j["heuristic"] = true;
  j["rate_exponent"] = v.rate_exponent;
  j["r_squared"] = std::isfinite(v.r_squared) ? nlohmann::json(v.r_squared) : nlohmann::json(nullptr);
  j["fit_samples"] = v.fit_samples;
  return j;
}

inline std::string dump_json(const nlohmann::json& j) {
  std::string s = j.dump(2);
  return s + "\n";
}

inline constexpr char kSnapshotMagic[8] = {'M', 'W', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// Layout: magic[8] "MWSNAP01", u32 version, u32 n, u64 M, f64 dr, f64 t, then M+1 doubles of u and
/// M+1 doubles of v, all little-endian.
inline void write_snapshot(std::ostream& os, int n, double dr, const Snapshot& s) {
  os.write(kSnapshotMagic, 8);
  detail::put_le<std::uint32_t>(os, kSnapshotVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(n));
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(s.u.size() - 1));
  detail::put_le<double>(os, dr);
  detail::put_le<double>(os, s.t);
  for (double x : s.u) detail::put_le<double>(os, x);
  for (double x : s.v) detail::put_le<double>(os, x);
}

struct SnapshotFile {
  std::uint32_t version = 0, n = 0;
  std::uint64_t M = 0;
  double dr = 0, t = 0;
  std::vector<double> u, v;
};

inline SnapshotFile read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0) throw ConfigError("snapshot: bad magic");
  SnapshotFile f;
  f.version = detail::get_le<std::uint32_t>(is);
  f.n = detail::get_le<std::uint32_t>(is);
  f.M = detail::get_le<std::uint64_t>(is);
  f.dr = detail::get_le<double>(is);
  f.t = detail::get_le<double>(is);
  f.u.resize(f.M + 1);
  f.v.resize(f.M + 1);
  for (double& x : f.u) x = detail::get_le<double>(is);
  for (double& x : f.v) x = detail::get_le<double>(is);
  return f;
}

/// Collects written files (relative to the output root) for the index.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }
  const std::filesystem::path& root() const { return root_; }

  std::ofstream open(const std::string& rel, bool binary = false) {
    const auto path = root_ / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw ConfigError("cannot write " + path.string());
    files_.push_back(rel);
    return os;
  }

  void write_text(const std::string& rel, const std::string& text) {
    auto os = open(rel);
    os << text;
  }

  /// index.json listing every output, sorted.
  void write_index() {
    std::vector<std::string> all = files_;
    all.push_back("index.json");
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::ofstream os(root_ / "index.json");
    os << dump_json(nlohmann::json{{"files", all}});
  }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

}  // namespace memwave::io
