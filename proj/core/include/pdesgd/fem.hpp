#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pdesgd/functions.hpp"
#include "pdesgd/mesh.hpp"
#include "pdesgd/random_field.hpp"

namespace pdesgd {

using ScalarField = std::function<double(double, double)>;

// Symmetric sparse stiffness matrix in CSR layout over the interior degrees
// of freedom (Dirichlet rows and columns eliminated), plus the maps between
// interior dofs and mesh vertices.
struct SparseSystem {
  std::shared_ptr<const TriMesh> mesh;
  int n = 0;  // interior dof count
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;
  std::vector<int> dof_to_vertex;  // size n
  std::vector<int> vertex_to_dof;  // -1 on boundary vertices

  // y = A x on interior-dof vectors.
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

// Elementwise-constant interpolation of the coefficient: a at the triangle
// centroid. Throws if any evaluation is non-finite or not positive.
P0Function interpolate_coefficient(const FieldRealization& field,
                                   const std::shared_ptr<const TriMesh>& mesh);

// Stiffness matrix for the form  int a_h grad y . grad v  with P1 elements;
// the per-triangle integral is exact (P1 gradients are constant). Assembly
// order is triangle-index ascending, so runs are bit-reproducible.
SparseSystem assemble_stiffness(const P0Function& a_h);

// Nodal load vector (u_h, phi_i) for a piecewise-constant u_h: each triangle
// contributes value * area / 3 to each of its vertices. Full-length vector
// (boundary entries included); solves restrict to interior dofs.
std::vector<double> load_from_p0(const P0Function& u);

// Nodal load vector (f, phi_i) for an analytic f via the fixed degree-5
// 7-point rule per triangle. Throws on non-finite f values.
std::vector<double> load_from_function(const std::shared_ptr<const TriMesh>& mesh,
                                       const ScalarField& f);

// Nodal vector (y_h, phi_i) for a P1 function (exact elementwise mass).
std::vector<double> apply_mass(const P1Function& y);

// Jacobi-preconditioned conjugate gradients down to ||b - A x|| <= tol ||b||.
// Throws std::runtime_error if 10 * n iterations do not reach the tolerance.
// The result carries exact zeros on boundary nodes.
P1Function solve_spd(const SparseSystem& system, const std::vector<double>& rhs_full,
                     double tol = 1e-10);

// State solve  int a grad y . grad v = (u + shift, v)  for all interior v.
// Returns the solution together with the assembled system so the adjoint can
// reuse the matrix (the form is symmetric).
struct StateSolution {
  P1Function y;
  SparseSystem system;
  P0Function a_h;
};
StateSolution solve_state(const FieldRealization& field, const P0Function& u,
                          const ScalarField* shift = nullptr, double tol = 1e-10);

// Adjoint solve  int a grad v . grad p = (target - y, v)  reusing the state
// matrix.
P1Function solve_adjoint(const SparseSystem& system, const P1Function& y,
                         const ScalarField& target, double tol = 1e-10);

// Cellwise L2 projection of a P1 function into the P0 control space: the
// mean of the three nodal values (exact for linear functions).
P0Function l2_project_p1_to_p0(const P1Function& p);

// One-sample stochastic gradient  lambda u - P_h p_h(xi).
P0Function stochastic_gradient(const P0Function& u, const FieldRealization& field,
                               double lambda, const ScalarField& target,
                               const ScalarField* shift = nullptr,
                               double tol = 1e-10);

// One-sample objective  (1/2)||y_h(xi) - target||^2 + (lambda/2)||u||^2.
// The tracking term uses the degree-5 rule; the control term is exact.
double objective_sample(const P0Function& u, const FieldRealization& field,
                        double lambda, const ScalarField& target,
                        const ScalarField* shift = nullptr, double tol = 1e-10);

// int (y_h - f)^2 with the degree-5 rule.
double integral_sq_diff(const P1Function& y, const ScalarField& f);

// int g(x) dx with the degree-5 rule on the given mesh.
double integral(const std::shared_ptr<const TriMesh>& mesh, const ScalarField& g);

}  // namespace pdesgd
