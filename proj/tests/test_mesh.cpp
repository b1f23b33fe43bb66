#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pdesgd/functions.hpp"
#include "pdesgd/mesh.hpp"
#include "pdesgd/rng.hpp"

using namespace pdesgd;

namespace {
const double kSqrt2Half = std::sqrt(2.0) / 2.0;
}

TEST_CASE("initial mesh: 8 congruent right triangles on a 3x3 grid") {
  auto mesh = TriMesh::unit_square_initial();
  CHECK(mesh->triangle_count() == 8);
  CHECK(mesh->vertex_count() == 9);
  CHECK(mesh->h_max() == doctest::Approx(kSqrt2Half).epsilon(1e-15));
  for (int t = 0; t < 8; ++t) CHECK(mesh->area(t) == doctest::Approx(0.125).epsilon(1e-15));

  int boundary = 0;
  for (bool b : mesh->boundary_vertex()) boundary += b ? 1 : 0;
  CHECK(boundary == 8);
  CHECK(mesh->is_conforming());
  CHECK(mesh->level() == 0);
  CHECK(mesh->parent_of().empty());
}

TEST_CASE("uniform refinement quadruples triangles and halves h exactly") {
  auto m0 = TriMesh::unit_square_initial();
  auto m1 = refine_uniform(m0);
  CHECK(m1->triangle_count() == 32);
  CHECK(m1->h_max() == m0->h_max() / 2.0);  // exact dyadic halving
  CHECK(m1->is_conforming());

  auto m2 = refine_uniform(m1);
  CHECK(m2->triangle_count() == 128);
  CHECK(m2->h_max() == doctest::Approx(0.17677669529663689).epsilon(1e-15));
  CHECK(m2->is_conforming());

  SUBCASE("vertex nestedness") {
    for (int v = 0; v < m0->vertex_count(); ++v) {
      CHECK(m1->vertices()[v].x == m0->vertices()[v].x);
      CHECK(m1->vertices()[v].y == m0->vertices()[v].y);
    }
  }

  SUBCASE("children partition their parent's area") {
    std::vector<double> child_area(m0->triangle_count(), 0.0);
    for (int t = 0; t < m1->triangle_count(); ++t)
      child_area[m1->parent_of()[t]] += m1->area(t);
    for (int t = 0; t < m0->triangle_count(); ++t)
      CHECK(child_area[t] == doctest::Approx(m0->area(t)).epsilon(1e-12));
  }

  SUBCASE("triangle counts and h follow 8*4^k and (sqrt2/2)/2^k") {
    auto m = m0;
    for (int k = 0; k <= 4; ++k) {
      CHECK(m->triangle_count() == 8 * (1 << (2 * k)));
      CHECK(m->h_max() == doctest::Approx(kSqrt2Half / (1 << k)).epsilon(1e-14));
      double recomputed = 0.0;
      for (int t = 0; t < m->triangle_count(); ++t)
        recomputed = std::max(recomputed, m->diameter(t));
      CHECK(std::abs(recomputed - m->h_max()) <= 1e-14);
      if (k < 4) m = refine_uniform(m);
    }
  }
}

TEST_CASE("prolong_p0 is the exact nested injection") {
  auto coarse = TriMesh::unit_square_initial();
  auto fine = refine_uniform(coarse);
  auto finer = refine_uniform(fine);

  SUBCASE("constants are reproduced") {
    P0Function u(coarse, 0.3);
    P0Function v = prolong_p0(u, finer);
    for (int t = 0; t < v.size(); ++t) CHECK(v[t] == 0.3);
  }

  SUBCASE("indicator of one coarse triangle spreads to descendants, norm kept") {
    P0Function u(coarse, 0.0);
    u[3] = 1.0;
    P0Function v = prolong_p0(u, fine);
    int hits = 0;
    for (int t = 0; t < v.size(); ++t)
      if (v[t] == 1.0) {
        ++hits;
        CHECK(fine->parent_of()[t] == 3);
      }
    CHECK(hits == 4);
    CHECK(l2_norm(v) == doctest::Approx(l2_norm(u)).epsilon(1e-15));
  }

  SUBCASE("L2 norm preserved and prolongation linear on random data") {
    RngStream rng(7, 0);
    for (int rep = 0; rep < 20; ++rep) {
      P0Function u(coarse), v(coarse);
      for (int t = 0; t < u.size(); ++t) {
        u[t] = rng.uniform(-2, 2);
        v[t] = rng.uniform(-2, 2);
      }
      double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
      CHECK(l2_norm(prolong_p0(u, finer)) ==
            doctest::Approx(l2_norm(u)).epsilon(1e-14));
      P0Function combo(coarse);
      for (int t = 0; t < u.size(); ++t) combo[t] = a * u[t] + b * v[t];
      P0Function lhs = prolong_p0(combo, finer);
      P0Function ua = prolong_p0(u, finer), vb = prolong_p0(v, finer);
      for (int t = 0; t < lhs.size(); ++t)
        CHECK(lhs[t] == doctest::Approx(a * ua[t] + b * vb[t]).epsilon(1e-14));
    }
  }

  SUBCASE("prolonging to an unrelated mesh fails") {
    auto other = refine_uniform(TriMesh::unit_square_initial());
    P0Function u(fine, 1.0);
    CHECK_THROWS_AS((void)prolong_p0(u, other), std::invalid_argument);
  }
}

TEST_CASE("conformity holds through repeated refinement") {
  auto m = TriMesh::unit_square_initial();
  for (int k = 0; k < 4; ++k) {
    m = refine_uniform(m);
    CHECK(m->is_conforming());
  }
}

TEST_CASE("mesh dump format") {
  auto m = TriMesh::unit_square_initial();
  std::ostringstream os;
  m->dump(os);
  std::istringstream in(os.str());
  std::string tag;
  int vrows = 0, trows = 0;
  double x, y;
  int flag, i, j, k, level, parent;
  while (in >> tag) {
    if (tag == "v") {
      in >> x >> y >> flag;
      ++vrows;
    } else {
      REQUIRE(tag == "t");
      in >> i >> j >> k >> level >> parent;
      CHECK(level == 0);
      CHECK(parent == -1);
      ++trows;
    }
  }
  CHECK(vrows == 9);
  CHECK(trows == 8);
}
