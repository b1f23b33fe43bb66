#pragma once

#include <memory>
#include <vector>

#include "pdesgd/mesh.hpp"

namespace pdesgd {

// Piecewise-constant function: one value per triangle (the control space).
class P0Function {
 public:
  P0Function() = default;
  P0Function(std::shared_ptr<const TriMesh> mesh, double value = 0.0)
      : mesh_(std::move(mesh)), values_(mesh_->triangle_count(), value) {}
  P0Function(std::shared_ptr<const TriMesh> mesh, std::vector<double> values);

  const std::shared_ptr<const TriMesh>& mesh() const { return mesh_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](int t) const { return values_[t]; }
  double& operator[](int t) { return values_[t]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<double> values_;
};

// Continuous piecewise-linear function: one value per vertex (the state
// space). Homogeneous-Dirichlet fields keep exact zeros on boundary nodes.
class P1Function {
 public:
  P1Function() = default;
  P1Function(std::shared_ptr<const TriMesh> mesh, double value = 0.0)
      : mesh_(std::move(mesh)), values_(mesh_->vertex_count(), value) {}
  P1Function(std::shared_ptr<const TriMesh> mesh, std::vector<double> values);

  const std::shared_ptr<const TriMesh>& mesh() const { return mesh_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](int v) const { return values_[v]; }
  double& operator[](int v) { return values_[v]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<double> values_;
};

// Transfers a piecewise-constant function to a nested refinement: each fine
// triangle inherits its ancestor's value. Exact (an isometric injection for
// nested P0 spaces). Throws if `fine` does not descend from the function's
// mesh.
P0Function prolong_p0(const P0Function& coarse,
                      const std::shared_ptr<const TriMesh>& fine);

// Exact L2 quantities for piecewise-constant data.
double l2_norm(const P0Function& u);
double l2_inner(const P0Function& u, const P0Function& v);

// Exact L2 norm of a piecewise-linear function (elementwise mass matrix).
double l2_norm(const P1Function& y);

// Exact integral of (P0 u) * (P1 y) over the domain.
double l2_inner(const P0Function& u, const P1Function& y);

}  // namespace pdesgd
