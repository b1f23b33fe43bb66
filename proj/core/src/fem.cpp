#include "pdesgd/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pdesgd {

namespace {

// Symmetric degree-5 rule, 7 points per triangle (barycentric).
constexpr int kQn = 7;
constexpr double kQw[kQn] = {
    0.225,
    0.1323941527885062, 0.1323941527885062, 0.1323941527885062,
    0.1259391805448271, 0.1259391805448271, 0.1259391805448271};
constexpr double kA1 = 0.0597158717897698;
constexpr double kB1 = 0.4701420641051151;
constexpr double kA2 = 0.7974269853530873;
constexpr double kB2 = 0.1012865073234563;
constexpr double kQb[kQn][3] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    {kA1, kB1, kB1}, {kB1, kA1, kB1}, {kB1, kB1, kA1},
    {kA2, kB2, kB2}, {kB2, kA2, kB2}, {kB2, kB2, kA2}};

}  // namespace

void SparseSystem::multiply(const std::vector<double>& x,
                            std::vector<double>& y) const {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      s += values[k] * x[col_idx[k]];
    y[i] = s;
  }
}

P0Function interpolate_coefficient(const FieldRealization& field,
                                   const std::shared_ptr<const TriMesh>& mesh) {
  std::vector<double> values(mesh->triangle_count());
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    Vec2 c = mesh->centroid(t);
    double v = field(c.x, c.y);
    if (!std::isfinite(v) || v <= 0.0)
      throw std::runtime_error(
          "interpolate_coefficient: non-finite or non-positive value " +
          std::to_string(v));
    values[t] = v;
  }
  return P0Function(mesh, std::move(values));
}

SparseSystem assemble_stiffness(const P0Function& a_h) {
  const auto& mesh = a_h.mesh();
  const auto& verts = mesh->vertices();
  const int nv = mesh->vertex_count();

  SparseSystem sys;
  sys.mesh = mesh;
  sys.vertex_to_dof.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!mesh->boundary_vertex()[v]) {
      sys.vertex_to_dof[v] = sys.n++;
      sys.dof_to_vertex.push_back(v);
    }
  }

  // Dense-per-row map would be wasteful; gather triplets then compress.
  // Triangle order ascending keeps the accumulation deterministic.
  std::vector<std::vector<std::pair<int, double>>> rows(sys.n);
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    if (a_h[t] <= 0.0)
      throw std::runtime_error("assemble_stiffness: non-positive coefficient");
    const auto& tr = mesh->triangles()[t];
    const Vec2& p0 = verts[tr.v[0]];
    const Vec2& p1 = verts[tr.v[1]];
    const Vec2& p2 = verts[tr.v[2]];
    const double area = mesh->area(t);
    // grad phi_i = perp(opposite edge) / (2 area)
    const double gx[3] = {(p1.y - p2.y), (p2.y - p0.y), (p0.y - p1.y)};
    const double gy[3] = {(p2.x - p1.x), (p0.x - p2.x), (p1.x - p0.x)};
    const double scale = a_h[t] / (4.0 * area);
    for (int i = 0; i < 3; ++i) {
      int di = sys.vertex_to_dof[tr.v[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        int dj = sys.vertex_to_dof[tr.v[j]];
        if (dj < 0) continue;
        rows[di].push_back({dj, scale * (gx[i] * gx[j] + gy[i] * gy[j])});
      }
    }
  }

  sys.row_ptr.assign(sys.n + 1, 0);
  for (int i = 0; i < sys.n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    int unique = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (unique > 0 && r[unique - 1].first == r[k].first)
        r[unique - 1].second += r[k].second;
      else
        r[unique++] = r[k];
    }
    r.resize(unique);
    sys.row_ptr[i + 1] = sys.row_ptr[i] + unique;
  }
  sys.col_idx.resize(sys.row_ptr[sys.n]);
  sys.values.resize(sys.row_ptr[sys.n]);
  for (int i = 0; i < sys.n; ++i) {
    int base = sys.row_ptr[i];
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      sys.col_idx[base + k] = rows[i][k].first;
      sys.values[base + k] = rows[i][k].second;
    }
  }
  return sys;
}

std::vector<double> load_from_p0(const P0Function& u) {
  const auto& mesh = u.mesh();
  std::vector<double> b(mesh->vertex_count(), 0.0);
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    double w = u[t] * mesh->area(t) / 3.0;
    const auto& tr = mesh->triangles()[t];
    b[tr.v[0]] += w;
    b[tr.v[1]] += w;
    b[tr.v[2]] += w;
  }
  return b;
}

std::vector<double> load_from_function(const std::shared_ptr<const TriMesh>& mesh,
                                       const ScalarField& f) {
  const auto& verts = mesh->vertices();
  std::vector<double> b(mesh->vertex_count(), 0.0);
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tr = mesh->triangles()[t];
    const Vec2& p0 = verts[tr.v[0]];
    const Vec2& p1 = verts[tr.v[1]];
    const Vec2& p2 = verts[tr.v[2]];
    const double area = mesh->area(t);
    for (int q = 0; q < kQn; ++q) {
      double x = kQb[q][0] * p0.x + kQb[q][1] * p1.x + kQb[q][2] * p2.x;
      double y = kQb[q][0] * p0.y + kQb[q][1] * p1.y + kQb[q][2] * p2.y;
      double fv = f(x, y);
      if (!std::isfinite(fv))
        throw std::runtime_error("load_from_function: non-finite value");
      double w = kQw[q] * area * fv;
      for (int i = 0; i < 3; ++i) b[tr.v[i]] += w * kQb[q][i];
    }
  }
  return b;
}

std::vector<double> apply_mass(const P1Function& y) {
  const auto& mesh = y.mesh();
  std::vector<double> b(mesh->vertex_count(), 0.0);
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tr = mesh->triangles()[t];
    double a = y[tr.v[0]], c = y[tr.v[1]], d = y[tr.v[2]];
    double sum = a + c + d;
    double w = mesh->area(t) / 12.0;
    b[tr.v[0]] += w * (a + sum);
    b[tr.v[1]] += w * (c + sum);
    b[tr.v[2]] += w * (d + sum);
  }
  return b;
}

P1Function solve_spd(const SparseSystem& sys, const std::vector<double>& rhs_full,
                     double tol) {
  const int n = sys.n;
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = rhs_full[sys.dof_to_vertex[i]];

  P1Function out(sys.mesh, 0.0);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return out;

  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
      if (sys.col_idx[k] == i) d = sys.values[k];
    diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }

  std::vector<double> x(n, 0.0), r(b), z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  const long max_iter = 10L * n;
  double rnorm = bnorm;
  for (long it = 0; it < max_iter; ++it) {
    sys.multiply(p, ap);
    double pap = 0.0;
    for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
    double alpha = rz / pap;
    rnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rnorm += r[i] * r[i];
    }
    rnorm = std::sqrt(rnorm);
    if (rnorm <= tol * bnorm) {
      for (int i = 0; i < n; ++i) out[sys.dof_to_vertex[i]] = x[i];
      return out;
    }
    double rz_next = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = diag[i] * r[i];
      rz_next += r[i] * z[i];
    }
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw std::runtime_error("solve_spd: CG iteration cap exceeded, residual " +
                           std::to_string(rnorm / bnorm));
}

StateSolution solve_state(const FieldRealization& field, const P0Function& u,
                          const ScalarField* shift, double tol) {
  StateSolution s;
  s.a_h = interpolate_coefficient(field, u.mesh());
  s.system = assemble_stiffness(s.a_h);
  std::vector<double> rhs = load_from_p0(u);
  if (shift != nullptr) {
    std::vector<double> extra = load_from_function(u.mesh(), *shift);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += extra[i];
  }
  s.y = solve_spd(s.system, rhs, tol);
  return s;
}

P1Function solve_adjoint(const SparseSystem& system, const P1Function& y,
                         const ScalarField& target, double tol) {
  std::vector<double> rhs = load_from_function(system.mesh, target);
  std::vector<double> my = apply_mass(y);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= my[i];
  return solve_spd(system, rhs, tol);
}

P0Function l2_project_p1_to_p0(const P1Function& p) {
  const auto& mesh = p.mesh();
  std::vector<double> values(mesh->triangle_count());
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tr = mesh->triangles()[t];
    values[t] = (p[tr.v[0]] + p[tr.v[1]] + p[tr.v[2]]) / 3.0;
  }
  return P0Function(mesh, std::move(values));
}

P0Function stochastic_gradient(const P0Function& u, const FieldRealization& field,
                               double lambda, const ScalarField& target,
                               const ScalarField* shift, double tol) {
  StateSolution s = solve_state(field, u, shift, tol);
  P1Function p = solve_adjoint(s.system, s.y, target, tol);
  P0Function g = l2_project_p1_to_p0(p);
  for (int t = 0; t < g.size(); ++t) g[t] = lambda * u[t] - g[t];
  return g;
}

double objective_sample(const P0Function& u, const FieldRealization& field,
                        double lambda, const ScalarField& target,
                        const ScalarField* shift, double tol) {
  StateSolution s = solve_state(field, u, shift, tol);
  double track = 0.5 * integral_sq_diff(s.y, target);
  double cost = 0.5 * lambda * l2_inner(u, u);
  return track + cost;
}

double integral_sq_diff(const P1Function& y, const ScalarField& f) {
  const auto& mesh = y.mesh();
  const auto& verts = mesh->vertices();
  double total = 0.0;
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tr = mesh->triangles()[t];
    const Vec2& p0 = verts[tr.v[0]];
    const Vec2& p1 = verts[tr.v[1]];
    const Vec2& p2 = verts[tr.v[2]];
    double acc = 0.0;
    for (int q = 0; q < kQn; ++q) {
      double x = kQb[q][0] * p0.x + kQb[q][1] * p1.x + kQb[q][2] * p2.x;
      double yy = kQb[q][0] * p0.y + kQb[q][1] * p1.y + kQb[q][2] * p2.y;
      double yh = kQb[q][0] * y[tr.v[0]] + kQb[q][1] * y[tr.v[1]] +
                  kQb[q][2] * y[tr.v[2]];
      double d = yh - f(x, yy);
      acc += kQw[q] * d * d;
    }
    total += acc * mesh->area(t);
  }
  return total;
}

double integral(const std::shared_ptr<const TriMesh>& mesh, const ScalarField& g) {
  const auto& verts = mesh->vertices();
  double total = 0.0;
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tr = mesh->triangles()[t];
    const Vec2& p0 = verts[tr.v[0]];
    const Vec2& p1 = verts[tr.v[1]];
    const Vec2& p2 = verts[tr.v[2]];
    double acc = 0.0;
    for (int q = 0; q < kQn; ++q) {
      double x = kQb[q][0] * p0.x + kQb[q][1] * p1.x + kQb[q][2] * p2.x;
      double y = kQb[q][0] * p0.y + kQb[q][1] * p1.y + kQb[q][2] * p2.y;
      acc += kQw[q] * g(x, y);
    }
    total += acc * mesh->area(t);
  }
  return total;
}

}  // namespace pdesgd
