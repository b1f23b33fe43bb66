#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

namespace pdesgd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Nested conforming triangulation of the unit square (0,1) x (0,1).
//
// Triangles are stored as vertex-index triples (v0, v1, peak) in
// counterclockwise order. The peak is the newest vertex of the triangle
// (for the meshes built here it is always the right-angle vertex), and the
// edge (v0, v1) opposite the peak is the refinement edge. One uniform
// refinement pass bisects every triangle twice, replacing it by four similar
// children of half the diameter, and the result is again conforming.
//
// Meshes are immutable once built. refine_uniform() returns a new mesh that
// keeps a shared pointer to its parent, so piecewise-constant data can be
// transferred across any number of levels by following the parent chain.
class TriMesh {
 public:
  struct Tri {
    int v[3];  // v[2] is the peak (newest vertex)
  };

  // Level-0 mesh: 3x3 vertex grid, 8 congruent right triangles, each of the
  // four half-cells split along the diagonal toward the center so that
  // uniform newest-vertex bisection produces self-similar children.
  static std::shared_ptr<const TriMesh> unit_square_initial();

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Tri>& triangles() const { return triangles_; }
  const std::vector<bool>& boundary_vertex() const { return boundary_; }
  int level() const { return level_; }
  double h_max() const { return h_max_; }

  // Index into the parent mesh's triangle list; empty at level 0.
  const std::vector<int>& parent_of() const { return parent_of_; }
  std::shared_ptr<const TriMesh> parent() const { return parent_; }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

  double area(int t) const { return areas_[t]; }
  double diameter(int t) const { return diams_[t]; }
  Vec2 centroid(int t) const;

  // Exhaustive edge-incidence conformity check: every edge belongs to
  // exactly two triangles, or to one triangle and the domain boundary.
  bool is_conforming() const;

  // Plain-text dump: "v x y boundary_flag" rows then "t i j k level parent"
  // rows (k is the peak vertex).
  void dump(std::ostream& os) const;

  friend std::shared_ptr<const TriMesh> refine_uniform(
      const std::shared_ptr<const TriMesh>& mesh);

 private:
  TriMesh() = default;
  void finalize_geometry();

  std::vector<Vec2> vertices_;
  std::vector<Tri> triangles_;
  std::vector<bool> boundary_;
  std::vector<int> parent_of_;
  std::shared_ptr<const TriMesh> parent_;
  std::vector<double> areas_;
  std::vector<double> diams_;
  double h_max_ = 0.0;
  int level_ = 0;
};

// One full uniform refinement pass (two newest-vertex bisections per
// triangle). Halves h_max exactly; the input vertex set is a prefix of the
// output's.
std::shared_ptr<const TriMesh> refine_uniform(
    const std::shared_ptr<const TriMesh>& mesh);

// For `fine` obtained from `coarse` by >= 0 refine_uniform passes, returns
// the map fine-triangle-index -> ancestor-triangle-index in `coarse`.
// Throws std::invalid_argument if `fine` does not descend from `coarse`.
std::vector<int> ancestor_triangle_map(const TriMesh& coarse,
                                       const TriMesh& fine);

}  // namespace pdesgd
