#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdesgd/config.hpp"
#include "pdesgd/harness.hpp"

using namespace pdesgd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("pdesgd_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

ExperimentConfig tiny_sc_config() {
  ExperimentConfig cfg;
  cfg.variant = ProblemVariant::StronglyConvex;
  cfg.lambda = 0.1;
  cfg.family = "cosine";
  cfg.a0 = 5.0;
  cfg.m = 20;
  cfg.l = 0.5;
  cfg.a_min = 3.55;
  cfg.rule = StepRuleKind::StronglyConvex;
  cfg.theta = 6.0;
  cfg.bias_k = 5.0;
  cfg.nu_auto = false;
  cfg.nu = 299.0;
  cfg.c = 18.0;
  cfg.iterations = 3;
  cfg.samples = 4;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig cfg = tiny_sc_config();
  cfg.iterations_list = {25, 50, 75};
  std::string first = cfg.emit_string();
  std::istringstream in(first);
  ExperimentConfig parsed = ExperimentConfig::parse(in);
  CHECK(parsed.emit_string() == first);
}

TEST_CASE("config parse diagnostics carry line numbers") {
  SUBCASE("unknown key") {
    std::istringstream in("[problem]\nvariant = strongly_convex\nbogus = 1\n");
    try {
      (void)ExperimentConfig::parse(in);
      FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }

  SUBCASE("malformed number") {
    std::istringstream in("[problem]\nlambda = zebra\n");
    try {
      (void)ExperimentConfig::parse(in);
      FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("unknown section") {
    std::istringstream in("[nonsense]\nx = 1\n");
    CHECK_THROWS_AS((void)ExperimentConfig::parse(in), std::runtime_error);
  }
}

TEST_CASE("problem setup") {
  SUBCASE("convex variant norms feed the M bound") {
    ExperimentConfig cfg = tiny_sc_config();
    cfg.variant = ProblemVariant::ConvexAveraging;
    cfg.lambda = 0.0;
    cfg.a_min = 1.0;
    ProblemSetup setup = build_problem(cfg);
    CHECK(setup.norm_y_target == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(setup.m_bound == doctest::Approx(2.4901379414).epsilon(1e-9));
    CHECK(setup.state_shift.has_value());
  }

  SUBCASE("strongly convex variant has no state shift") {
    ProblemSetup setup = build_problem(tiny_sc_config());
    CHECK(!setup.state_shift.has_value());
    CHECK(setup.lambda == 0.1);
  }
}

TEST_CASE("estimate_objective") {
  ExperimentConfig cfg = tiny_sc_config();
  cfg.variant = ProblemVariant::ConvexAveraging;
  cfg.lambda = 0.0;
  cfg.family = "piecewise";
  cfg.upper_lo = cfg.upper_hi = 2.0;  // degenerate intervals: deterministic field
  cfg.lower_lo = cfg.lower_hi = 2.0;
  cfg.a_min = 2.0;
  ProblemSetup setup = build_problem(cfg);

  auto mesh = refine_uniform(refine_uniform(TriMesh::unit_square_initial()));
  P0Function u(mesh, 0.3);

  SUBCASE("deterministic field: zero stderr, mean equals a single sample") {
    RngStream r1(3, 0), r2(3, 100), r3(99, 5);
    Estimate one = estimate_objective(u, setup, 1, r1);
    Estimate many = estimate_objective(u, setup, 8, r2);
    Estimate other = estimate_objective(u, setup, 3, r3);
    CHECK(many.stderr_mean == 0.0);
    CHECK(many.mean == doctest::Approx(one.mean).epsilon(1e-15));
    CHECK(other.mean == doctest::Approx(one.mean).epsilon(1e-15));
  }

  SUBCASE("paired difference of identical controls is exactly zero") {
    RngStream rng(17, 0);
    Estimate d = estimate_objective_diff(u, u, setup, 4, rng);
    CHECK(d.mean == 0.0);
    CHECK(d.stderr_mean == 0.0);
  }

  SUBCASE("stderr shrinks roughly like 1/sqrt(m) on a noisy field") {
    ExperimentConfig noisy = tiny_sc_config();
    ProblemSetup s2 = build_problem(noisy);
    auto coarse = refine_uniform(TriMesh::unit_square_initial());
    P0Function u2(coarse, 0.2);
    RngStream ra(21, 0), rb(21, 1);
    Estimate e100 = estimate_objective(u2, s2, 100, ra);
    Estimate e900 = estimate_objective(u2, s2, 900, rb);
    double ratio = e100.stderr_mean / e900.stderr_mean;
    CHECK(ratio > 1.8);  // ideal 3.0, wide tolerance for sampling noise
    CHECK(ratio < 5.0);
  }
}

TEST_CASE("reference save/load round trip and ancestry checks") {
  std::string dir = temp_dir("ref");
  auto coarse = refine_uniform(TriMesh::unit_square_initial());
  auto fine = refine_uniform(coarse);
  P0Function u(fine);
  for (int t = 0; t < u.size(); ++t) u[t] = 0.01 * t;
  save_reference(dir, u);

  Reference ref = load_reference(dir);
  CHECK(ref.level == 2);
  REQUIRE(ref.u.size() == u.size());
  for (int t = 0; t < u.size(); ++t) CHECK(ref.u[t] == u[t]);

  SUBCASE("prolong from an ancestor level") {
    P0Function v(coarse, 1.5);
    P0Function w = prolong_to_reference(v, ref);
    CHECK(w.size() == ref.u.size());
    for (int t = 0; t < w.size(); ++t) CHECK(w[t] == 1.5);
  }

  SUBCASE("a finer-than-reference mesh is rejected") {
    auto finer = refine_uniform(fine);
    P0Function v(finer, 0.0);
    CHECK_THROWS_AS((void)prolong_to_reference(v, ref), std::runtime_error);
  }

  SUBCASE("missing reference directory is reported") {
    CHECK_THROWS_AS((void)load_reference(dir + "_nope"), std::runtime_error);
  }
}

TEST_CASE("subcommand outputs are deterministic for a fixed seed") {
  ExperimentConfig cfg = tiny_sc_config();
  std::string d1 = temp_dir("det1");
  std::string d2 = temp_dir("det2");
  run_sc(cfg, d1);
  run_sc(cfg, d2);
  for (const char* f : {"trace.csv", "jhat.csv", "final_u.txt", "config_echo.cfg"})
    CHECK(slurp(d1 + "/" + f) == slurp(d2 + "/" + f));

  SUBCASE("changing the seed changes the trajectory") {
    ExperimentConfig cfg2 = cfg;
    cfg2.seed = 6;
    std::string d3 = temp_dir("det3");
    run_sc(cfg2, d3);
    CHECK(slurp(d1 + "/final_u.txt") != slurp(d3 + "/final_u.txt"));
  }
}

TEST_CASE("fem convergence subcommand emits the study and slope") {
  ExperimentConfig cfg = tiny_sc_config();
  cfg.initial_level = 1;
  cfg.iterations = 4;  // data points
  std::string dir = temp_dir("fem");
  run_fem_convergence(cfg, dir);
  std::string slopes = slurp(dir + "/slopes.csv");
  // header + one row mentioning the error-vs-h slope
  CHECK(slopes.find("l2_error_vs_h") != std::string::npos);
  double slope = 0.0;
  std::sscanf(slopes.c_str(), "quantity,slope,stderr\nl2_error_vs_h,%lf", &slope);
  CHECK(std::abs(slope - 2.0) < 0.2);
}

TEST_CASE("compare requires a reference") {
  ExperimentConfig cfg = tiny_sc_config();
  cfg.reference_path = "";
  CHECK_THROWS_AS((void)run_compare(cfg, temp_dir("cmp")), std::runtime_error);
}
