#include <doctest.h>

#include <cmath>

#include "pdesgd/functions.hpp"
#include "pdesgd/optimizer.hpp"
#include "pdesgd/rng.hpp"

using namespace pdesgd;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::shared_ptr<const TriMesh> level_mesh(int k) {
  auto m = TriMesh::unit_square_initial();
  for (int i = 0; i < k; ++i) m = refine_uniform(m);
  return m;
}

PsgConfig small_sc_config() {
  PsgConfig pc;
  pc.lambda = 0.1;
  pc.field = kl_cosine(20, 0.5, 5.0);
  const double amp = 8.0 * kPi * kPi + 1.0 / (8.0 * kPi * kPi * 0.1);
  pc.y_target = [amp](double x, double y) {
    return -amp * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
  };
  pc.rule = StronglyConvexStep{6.0, 299.0};
  pc.schedule = MeshSchedule{18.0, 1.0};
  pc.iterations = 5;
  return pc;
}

}  // namespace

TEST_CASE("project_box") {
  auto mesh = level_mesh(0);

  SUBCASE("componentwise clamp") {
    P0Function u(mesh, 0.0);
    u[0] = 1.5;
    u[1] = -0.2;
    u[2] = -3.0;
    P0Function p = project_box(u, -1.0, 1.0);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -0.2);
    CHECK(p[2] == -1.0);
  }

  SUBCASE("idempotent on admissible controls") {
    RngStream rng(1, 0);
    P0Function u(mesh);
    for (int t = 0; t < u.size(); ++t) u[t] = rng.uniform(-1, 1);
    P0Function p = project_box(u, -1.0, 1.0);
    for (int t = 0; t < u.size(); ++t) CHECK(p[t] == u[t]);
  }

  SUBCASE("nonexpansive in L2 over 100 random pairs") {
    RngStream rng(2, 0);
    for (int rep = 0; rep < 100; ++rep) {
      P0Function u(mesh), v(mesh), d(mesh), pd(mesh);
      for (int t = 0; t < u.size(); ++t) {
        u[t] = rng.uniform(-3, 3);
        v[t] = rng.uniform(-3, 3);
      }
      P0Function pu = project_box(u, -1.0, 1.0);
      P0Function pv = project_box(v, -1.0, 1.0);
      for (int t = 0; t < u.size(); ++t) {
        d[t] = u[t] - v[t];
        pd[t] = pu[t] - pv[t];
      }
      CHECK(l2_norm(pd) <= l2_norm(d) * (1 + 1e-12));
    }
  }

  SUBCASE("degenerate bounds are rejected") {
    P0Function u(mesh, 0.0);
    CHECK_THROWS_AS((void)project_box(u, 1.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("step_size") {
  SUBCASE("strongly convex theta/(n+nu)") {
    StepRule r = StronglyConvexStep{6.0, 299.0};
    CHECK(step_size(r, 1) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(step_size(r, 101) == doctest::Approx(6.0 / 400.0).epsilon(1e-15));
  }

  SUBCASE("constant rule is n-independent") {
    StepRule r = ConstantAveragingStep{1.0, 2.489, 100};
    double expected = 1.0 / std::sqrt(248.9);
    CHECK(step_size(r, 1) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(step_size(r, 50) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(0.063392).epsilon(1e-4));
  }

  SUBCASE("variable rule coincides with the constant rule at n = N") {
    StepRule c = ConstantAveragingStep{1.0, 2.489, 100};
    StepRule v = VariableAveragingStep{1.0, 1.0, 2.489};
    CHECK(step_size(v, 100) == doctest::Approx(step_size(c, 100)).epsilon(1e-15));
  }
}

TEST_CASE("derive_nu") {
  SUBCASE("experiment values with the +0.5 margin") {
    CHECK(derive_nu(6.0, 5.0, 0.1) == doctest::Approx(299.5).epsilon(1e-12));
    CHECK(derive_nu(3.5, 1.0, 0.2) == doctest::Approx(17.0).epsilon(1e-12));
  }

  SUBCASE("2 mu theta <= 1 is rejected") {
    CHECK_THROWS_AS((void)derive_nu(5.0, 1.0, 0.1), std::invalid_argument);
  }
}

TEST_CASE("mesh_bound") {
  MeshSchedule p1{17.5, 1.0};

  SUBCASE("strongly convex c/(n+nu)") {
    StepRule r = StronglyConvexStep{3.5, 17.0};
    CHECK(mesh_bound(p1, r, 100) ==
          doctest::Approx(17.5 / 117.0).epsilon(1e-14));
  }

  SUBCASE("averaging bound allows a coarse start") {
    MeshSchedule s{2.0, 1.0};
    StepRule r = ConstantAveragingStep{1.0, 1.0, 100};
    CHECK(mesh_bound(s, r, 1) == doctest::Approx(2.0).epsilon(1e-14));
  }

  SUBCASE("exponent p = 0.5 squares the bound") {
    MeshSchedule s{2.0, 0.5};
    StepRule r = VariableAveragingStep{1.0, 1.0, 1.0};
    double base = 2.0 / (std::sqrt(100.0) + std::sqrt(99.0));
    CHECK(mesh_bound(s, r, 100) == doctest::Approx(base * base).epsilon(1e-12));
    CHECK(base * base == doctest::Approx(0.0100503147).epsilon(1e-7));
  }
}

TEST_CASE("compute_M_bound") {
  const double norm_y = std::sqrt(2.5);
  const double norm_e = std::sqrt(1.0 + 9.0 * kPi * kPi * kPi * kPi);

  SUBCASE("a_min = 1 evaluates the closed form") {
    double m = compute_M_bound(1.0, 0.0, norm_y, norm_e, 1.0);
    CHECK(m == doctest::Approx(2.4901379414).epsilon(1e-9));
  }

  SUBCASE("a_min = 3.55 shrinks the bound") {
    double m = compute_M_bound(3.55, 0.0, norm_y, norm_e, 1.0);
    CHECK(m == doctest::Approx(0.0361173902).epsilon(1e-8));
  }

  SUBCASE("the cost weight plays no role") {
    CHECK(compute_M_bound(1.0, 0.0, norm_y, norm_e, 1.0) ==
          compute_M_bound(1.0, 123.0, norm_y, norm_e, 1.0));
  }
}

TEST_CASE("apply_step and averaging helpers") {
  auto mesh = level_mesh(0);

  SUBCASE("zero step leaves an admissible iterate unchanged") {
    RngStream rng(5, 0);
    P0Function u(mesh), g(mesh);
    for (int t = 0; t < u.size(); ++t) {
      u[t] = rng.uniform(-1, 1);
      g[t] = rng.uniform(-5, 5);
    }
    P0Function v = apply_step(u, g, 0.0, -1.0, 1.0);
    for (int t = 0; t < u.size(); ++t) CHECK(v[t] == u[t]);
  }

  SUBCASE("zero gradient leaves the iterate unchanged") {
    RngStream rng(6, 0);
    P0Function u(mesh), zero(mesh, 0.0);
    for (int t = 0; t < u.size(); ++t) u[t] = rng.uniform(-1, 1);
    P0Function v = apply_step(u, zero, 0.7, -1.0, 1.0);
    for (int t = 0; t < u.size(); ++t) CHECK(v[t] == u[t]);
  }

  SUBCASE("weighted mean of iterates 1,2,3 with weights 1,1,2 is 2.25") {
    P0Function avg(mesh, 0.0);
    double wsum = 0.0;
    double iterates[3] = {1.0, 2.0, 3.0};
    double weights[3] = {1.0, 1.0, 2.0};
    for (int i = 0; i < 3; ++i)
      accumulate_weighted_mean(avg, wsum, P0Function(mesh, iterates[i]),
                               weights[i]);
    CHECK(wsum == doctest::Approx(4.0).epsilon(1e-15));
    for (int t = 0; t < avg.size(); ++t)
      CHECK(avg[t] == doctest::Approx(2.25).epsilon(1e-14));
  }
}

TEST_CASE("psg_step") {
  PsgConfig pc = small_sc_config();

  SUBCASE("one step from zero is bit-reproducible") {
    auto run_once = [&]() {
      auto mesh = level_mesh(2);
      PsgState s = psg_init(pc, mesh, 42, 0);
      psg_step(s, pc, nullptr);
      return s.u;
    };
    P0Function a = run_once();
    P0Function b = run_once();
    REQUIRE(a.size() == b.size());
    for (int t = 0; t < a.size(); ++t) CHECK(a[t] == b[t]);
  }

  SUBCASE("iterates stay admissible step by step") {
    auto mesh = level_mesh(0);
    PsgState s = psg_init(pc, mesh, 7, 0);
    for (int n = 1; n <= 5; ++n) {
      psg_step(s, pc, nullptr);
      for (int t = 0; t < s.u.size(); ++t) {
        CHECK(s.u[t] >= -1.0);
        CHECK(s.u[t] <= 1.0);
      }
    }
  }
}

TEST_CASE("run_psg") {
  SUBCASE("N = 1 produces one row; averaged iterate is the post-step iterate") {
    PsgConfig pc = small_sc_config();
    pc.rule = VariableAveragingStep{1.0, 1.0, 2.489};
    pc.schedule = MeshSchedule{2.0, 1.0};
    pc.iterations = 1;
    pc.alpha = 0.5;
    RunRecord rec = run_psg(pc, 11);
    REQUIRE(rec.rows.size() == 1);
    REQUIRE(rec.final_u.size() == rec.averaged_u.size());
    for (int t = 0; t < rec.final_u.size(); ++t)
      CHECK(rec.averaged_u[t] == rec.final_u[t]);
  }

  SUBCASE("schedule compliance and monotone h over a short run") {
    PsgConfig pc = small_sc_config();
    pc.rule = VariableAveragingStep{1.0, 1.0, 0.0361173902};
    pc.schedule = MeshSchedule{2.0, 1.0};
    pc.iterations = 40;
    RunRecord rec = run_psg(pc, 3);
    REQUIRE(rec.rows.size() == 40);
    double prev_h = 1e9;
    for (const auto& row : rec.rows) {
      CHECK(row.h_n <= mesh_bound(pc.schedule, pc.rule, row.n) * (1 + 1e-12));
      CHECK(row.h_n <= prev_h);
      prev_h = row.h_n;
      CHECK(row.t_n == step_size(pc.rule, row.n));
    }
    // the averaging run actually refined at least once from level 0
    CHECK(rec.rows.back().triangles > 8);
  }

  SUBCASE("averaged iterate of an averaging run is admissible") {
    PsgConfig pc = small_sc_config();
    pc.lambda = 0.0;
    pc.rule = ConstantAveragingStep{1.0, 0.0361173902, 30};
    pc.schedule = MeshSchedule{2.0, 1.0};
    pc.iterations = 30;
    RunRecord rec = run_psg(pc, 19);
    for (int t = 0; t < rec.averaged_u.size(); ++t) {
      CHECK(rec.averaged_u[t] >= -1.0);
      CHECK(rec.averaged_u[t] <= 1.0);
    }
  }
}
