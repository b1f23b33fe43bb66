#include "pdesgd/functions.hpp"

#include <cmath>
#include <stdexcept>

namespace pdesgd {

P0Function::P0Function(std::shared_ptr<const TriMesh> mesh,
                       std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != mesh_->triangle_count())
    throw std::invalid_argument("P0Function: value count != triangle count");
}

P1Function::P1Function(std::shared_ptr<const TriMesh> mesh,
                       std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != mesh_->vertex_count())
    throw std::invalid_argument("P1Function: value count != vertex count");
}

P0Function prolong_p0(const P0Function& coarse,
                      const std::shared_ptr<const TriMesh>& fine) {
  const auto map = ancestor_triangle_map(*coarse.mesh(), *fine);
  std::vector<double> values(fine->triangle_count());
  for (int t = 0; t < fine->triangle_count(); ++t)
    values[t] = coarse.values()[map[t]];
  return P0Function(fine, std::move(values));
}

double l2_norm(const P0Function& u) {
  return std::sqrt(l2_inner(u, u));
}

double l2_inner(const P0Function& u, const P0Function& v) {
  if (u.mesh() != v.mesh())
    throw std::invalid_argument("l2_inner: mesh mismatch");
  const TriMesh& m = *u.mesh();
  double s = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t)
    s += u[t] * v[t] * m.area(t);
  return s;
}

double l2_norm(const P1Function& y) {
  const TriMesh& m = *y.mesh();
  double s = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles()[t];
    double a = y[tr.v[0]], b = y[tr.v[1]], c = y[tr.v[2]];
    double sum = a + b + c;
    s += m.area(t) / 12.0 * (a * a + b * b + c * c + sum * sum);
  }
  return std::sqrt(s);
}

double l2_inner(const P0Function& u, const P1Function& y) {
  if (u.mesh() != y.mesh())
    throw std::invalid_argument("l2_inner: mesh mismatch");
  const TriMesh& m = *u.mesh();
  double s = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto& tr = m.triangles()[t];
    double mean = (y[tr.v[0]] + y[tr.v[1]] + y[tr.v[2]]) / 3.0;
    s += u[t] * mean * m.area(t);
  }
  return s;
}

}  // namespace pdesgd
