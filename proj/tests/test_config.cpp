#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "memwave/config.hpp"
#include "memwave/io.hpp"

using namespace memwave;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const ConfigValidationError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, MinimalEchoesDefaults) {
  const ResolvedConfig rc = validate_config("{}");
  const auto e = rc.echo();
  EXPECT_EQ(e["params"]["n"], 1);
  EXPECT_EQ(e["kernels"]["g1"]["family"], "constant");
  EXPECT_EQ(e["simulation"]["mode"], "coupled");
  EXPECT_EQ(e["simulation"]["dr"], 0.01);
  EXPECT_EQ(e["simulation"]["blowup_rate"], "memory_ode");
  EXPECT_EQ(e["initial_data"]["u0"]["shape"], "cosine_bump");
  EXPECT_EQ(e["sequences"]["p"], "2");
  // the echo is itself a valid config resolving to the same echo
  EXPECT_EQ(validate_config(e.dump()).echo(), e);
}

TEST(Config, GammaOutOfRange) {
  const auto errs = errors_of(R"({"kernels": {"g1": {"family": "riemann_liouville", "gamma": 1.2}}})");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_NE(errs[0].find("/kernels/g1/gamma"), std::string::npos);
  EXPECT_NE(errs[0].find("Riemann-Liouville gamma must lie in (0, 1)"), std::string::npos);
  EXPECT_TRUE(any_contains(errors_of(R"({"params": {"gamma1": 1.2}})"), "/params/gamma1"));
}

TEST(Config, SobolevWarning) {
  const ResolvedConfig rc = validate_config(R"({"params": {"n": 3, "p": 4}})");
  ASSERT_EQ(rc.warnings.size(), 1u);
  EXPECT_NE(rc.warnings[0].find("Sobolev bound n/(n-2) = 3"), std::string::npos);
  EXPECT_TRUE(validate_config(R"({"params": {"n": 3, "p": 3}})").warnings.empty());
}

TEST(Config, UnknownKeysCarryPath) {
  auto errs = errors_of(R"({"simulation": {"dt": 0.1}})");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_NE(errs[0].find("/simulation/dt: unknown key"), std::string::npos);
  errs = errors_of(R"({"initial_data": {"u0": {"shape": "gaussian", "width": 2}}})");
  EXPECT_TRUE(any_contains(errs, "/initial_data/u0/width"));
  errs = errors_of(R"({"colour": 1, "sequences": {"seeds": {"log_X": 0}}})");
  EXPECT_TRUE(any_contains(errs, "/colour"));
  EXPECT_TRUE(any_contains(errs, "/sequences/seeds/log_X"));
}

TEST(Config, CollectsEveryViolation) {
  const auto errs = errors_of(R"({"params": {"p": 0.5}, "simulation": {"cfl": 1.5, "mode": "fast"},
                                  "initial_data": {"u1": {"shape": "gaussian", "radius": 0}}})");
  EXPECT_EQ(errs.size(), 4u);
  EXPECT_TRUE(any_contains(errs, "/params/p"));
  EXPECT_TRUE(any_contains(errs, "/simulation/cfl"));
  EXPECT_TRUE(any_contains(errs, "/simulation/mode"));
  EXPECT_TRUE(any_contains(errs, "/initial_data/u1/radius: support radius R must be > 0"));
}

TEST(Config, TypesAndParseErrors) {
  EXPECT_TRUE(any_contains(errors_of("{not json"), "not valid JSON"));
  EXPECT_TRUE(any_contains(errors_of(R"({"params": {"n": 1.5}})"), "/params/n: expected an integer"));
  EXPECT_TRUE(any_contains(errors_of(R"({"simulation": {"forcing": 1}})"), "expected true or false"));
  EXPECT_TRUE(any_contains(errors_of(R"({"kernels": {"g2": {"family": "weibull"}}})"), "unknown kernel family"));
  EXPECT_TRUE(any_contains(errors_of(R"({"simulation": {"mode": "mgt"}})"), "MGT mode requires"));
  EXPECT_TRUE(any_contains(errors_of(R"({"sequences": {"p": "1.x"}})"), "/sequences/p"));
}

TEST(Config, ResolvesKernelsAndGammas) {
  const ResolvedConfig rc = validate_config(
      R"({"kernels": {"g1": {"family": "riemann_liouville", "gamma": 0.25},
                      "g2": {"family": "custom", "t": [0.5, 1, 2], "g": [1.2, 1, 0.5]}},
          "simulation": {"mode": "single", "blowup_rate": "first_order", "snapshot_times": [0.5, 1]}})");
  EXPECT_EQ(rc.system.g1.family(), KernelFamily::RiemannLiouville);
  EXPECT_EQ(*rc.system.params.gamma1, 0.25);
  EXPECT_FALSE(rc.system.params.gamma2.has_value());
  EXPECT_EQ(rc.system.g2.family(), KernelFamily::Custom);
  EXPECT_NEAR(rc.system.g2.value(1.5), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(rc.system.mode, Mode::Single);
  EXPECT_EQ(rc.blowup_rate, BlowupRate::FirstOrder);
  EXPECT_EQ(rc.system.snapshot_times.size(), 2u);
}

TEST(Config, BundledDefaultIsValid) {
  std::ifstream is(MEMWAVE_SOURCE_DIR "/configs/default.json");
  ASSERT_TRUE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  const ResolvedConfig rc = validate_config(ss.str());
  EXPECT_TRUE(rc.warnings.empty());
  EXPECT_EQ(rc.system.g2.family(), KernelFamily::Exponential);
  EXPECT_EQ(rc.system.t_max, 3.0);
}

TEST(Io, Fmt17RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(io::fmt17(x)), x);
  EXPECT_EQ(io::fmt17(0.5), "0.5");
}

TEST(Io, SnapshotRoundTrip) {
  Snapshot s{1.25, {1.0, 2.0, 3.0}, {0.0, -1.0, 0.5}};
  std::stringstream ss;
  io::write_snapshot(ss, 3, 0.01, s);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 8), "MWSNAP01");
  EXPECT_EQ(bytes.size(), 8u + 4 + 4 + 8 + 8 + 8 + 6 * 8);
  const auto f = io::read_snapshot(ss);
  EXPECT_EQ(f.version, 1u);
  EXPECT_EQ(f.n, 3u);
  EXPECT_EQ(f.M, 2u);
  EXPECT_EQ(f.dr, 0.01);
  EXPECT_EQ(f.t, 1.25);
  EXPECT_EQ(f.u, s.u);
  EXPECT_EQ(f.v, s.v);
  std::stringstream bad("NOTSNAP!");
  EXPECT_THROW(io::read_snapshot(bad), ConfigError);
}

TEST(Io, TraceCsvHeader) {
  FunctionalTrace tr{0.1, {TraceRow{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}}};
  std::ostringstream os;
  io::write_trace_csv(os, tr);
  EXPECT_EQ(os.str(), "t,U,V,U0,V0,Lp_v,Lq_u,maxnorm_u,maxnorm_v\n0,1,2,3,4,5,6,7,8\n");
}

TEST(Io, SequenceCsvShape) {
  const auto s = case1_recursion(Rational(2), Rational(3), 3, 4);
  std::ostringstream os;
  io::write_case1_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  std::getline(is, line);
  EXPECT_NE(line.find("closed_form_agreement"), std::string::npos);
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13);
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
  }
  EXPECT_EQ(rows, 4);
}
