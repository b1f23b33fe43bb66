#include "pdesgd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>

namespace pdesgd {

namespace {

bool on_unit_square_boundary(const Vec2& p) {
  return p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
}

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

void TriMesh::finalize_geometry() {
  const auto n = triangles_.size();
  areas_.resize(n);
  diams_.resize(n);
  h_max_ = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const Vec2& a = vertices_[triangles_[t].v[0]];
    const Vec2& b = vertices_[triangles_[t].v[1]];
    const Vec2& c = vertices_[triangles_[t].v[2]];
    double twice = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (twice <= 0.0)
      throw std::runtime_error("TriMesh: non-positive triangle area");
    areas_[t] = 0.5 * twice;
    diams_[t] = std::max({dist(a, b), dist(b, c), dist(a, c)});
    h_max_ = std::max(h_max_, diams_[t]);
  }
  boundary_.resize(vertices_.size());
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    boundary_[v] = on_unit_square_boundary(vertices_[v]);
}

Vec2 TriMesh::centroid(int t) const {
  const Tri& tr = triangles_[t];
  const Vec2& a = vertices_[tr.v[0]];
  const Vec2& b = vertices_[tr.v[1]];
  const Vec2& c = vertices_[tr.v[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

std::shared_ptr<const TriMesh> TriMesh::unit_square_initial() {
  auto mesh = std::shared_ptr<TriMesh>(new TriMesh());
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      mesh->vertices_.push_back({0.5 * i, 0.5 * j});
  const int center = 4;
  // Each half-cell is split along the diagonal that touches the center
  // vertex. Triangles are (v0, v1, peak) with (v0, v1) the hypotenuse.
  const int cells[4][4] = {
      // ll, lr, ul, ur per cell
      {0, 1, 3, 4},
      {1, 2, 4, 5},
      {3, 4, 6, 7},
      {4, 5, 7, 8},
  };
  for (const auto& cell : cells) {
    int ll = cell[0], lr = cell[1], ul = cell[2], ur = cell[3];
    if (ur == center || ll == center) {
      // diagonal ll-ur
      mesh->triangles_.push_back({{ur, ll, lr}});
      mesh->triangles_.push_back({{ll, ur, ul}});
    } else {
      // diagonal lr-ul
      mesh->triangles_.push_back({{lr, ul, ll}});
      mesh->triangles_.push_back({{ul, lr, ur}});
    }
  }
  // Ensure counterclockwise orientation.
  for (auto& tr : mesh->triangles_) {
    const Vec2& a = mesh->vertices_[tr.v[0]];
    const Vec2& b = mesh->vertices_[tr.v[1]];
    const Vec2& c = mesh->vertices_[tr.v[2]];
    double twice = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (twice < 0.0) std::swap(tr.v[0], tr.v[1]);
  }
  mesh->level_ = 0;
  mesh->finalize_geometry();
  return mesh;
}

namespace {

struct BisectResult {
  std::vector<Vec2> vertices;
  std::vector<TriMesh::Tri> triangles;
  std::vector<int> parent;  // into the input triangle list
};

// One newest-vertex bisection of every triangle: split the refinement edge
// (v0, v1) at its midpoint m; children are (peak, v0, m) and (v1, peak, m),
// both counterclockwise with peak m.
BisectResult bisect_all(const std::vector<Vec2>& vertices,
                        const std::vector<TriMesh::Tri>& triangles) {
  BisectResult out;
  out.vertices = vertices;
  std::map<std::pair<int, int>, int> midpoint;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const TriMesh::Tri& tr = triangles[t];
    int a = tr.v[0], b = tr.v[1], p = tr.v[2];
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    int m;
    if (it == midpoint.end()) {
      m = static_cast<int>(out.vertices.size());
      out.vertices.push_back({0.5 * (vertices[a].x + vertices[b].x),
                              0.5 * (vertices[a].y + vertices[b].y)});
      midpoint.emplace(key, m);
    } else {
      m = it->second;
    }
    out.triangles.push_back({{p, a, m}});
    out.parent.push_back(static_cast<int>(t));
    out.triangles.push_back({{b, p, m}});
    out.parent.push_back(static_cast<int>(t));
  }
  return out;
}

}  // namespace

std::shared_ptr<const TriMesh> refine_uniform(
    const std::shared_ptr<const TriMesh>& mesh) {
  BisectResult first = bisect_all(mesh->vertices_, mesh->triangles_);
  BisectResult second = bisect_all(first.vertices, first.triangles);

  auto fine = std::shared_ptr<TriMesh>(new TriMesh());
  fine->vertices_ = std::move(second.vertices);
  fine->triangles_ = std::move(second.triangles);
  fine->parent_of_.resize(fine->triangles_.size());
  for (std::size_t t = 0; t < fine->triangles_.size(); ++t)
    fine->parent_of_[t] = first.parent[second.parent[t]];
  fine->parent_ = mesh;
  fine->level_ = mesh->level_ + 1;
  fine->finalize_geometry();
  return fine;
}

bool TriMesh::is_conforming() const {
  // Count triangle incidences per undirected edge; interior edges must have
  // exactly 2, boundary edges exactly 1 with both endpoints on the boundary.
  std::map<std::pair<int, int>, int> count;
  for (const Tri& tr : triangles_) {
    for (int e = 0; e < 3; ++e) {
      auto key = std::minmax(tr.v[e], tr.v[(e + 1) % 3]);
      ++count[key];
    }
  }
  for (const auto& [edge, c] : count) {
    if (c == 2) continue;
    if (c != 1) return false;
    const Vec2& a = vertices_[edge.first];
    const Vec2& b = vertices_[edge.second];
    bool on_side = (a.x == b.x && (a.x == 0.0 || a.x == 1.0)) ||
                   (a.y == b.y && (a.y == 0.0 || a.y == 1.0));
    if (!on_side) return false;
  }
  // Hanging nodes: a vertex lying strictly inside another triangle's edge
  // would break the incidence counts above because the two neighbors would
  // disagree about the shared edge, so nothing further to check.
  return true;
}

void TriMesh::dump(std::ostream& os) const {
  os.precision(17);
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    os << "v " << vertices_[v].x << ' ' << vertices_[v].y << ' '
       << (boundary_[v] ? 1 : 0) << '\n';
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    os << "t " << triangles_[t].v[0] << ' ' << triangles_[t].v[1] << ' '
       << triangles_[t].v[2] << ' ' << level_ << ' '
       << (parent_of_.empty() ? -1 : parent_of_[t]) << '\n';
}

std::vector<int> ancestor_triangle_map(const TriMesh& coarse,
                                       const TriMesh& fine) {
  std::vector<int> map(fine.triangle_count());
  for (int t = 0; t < fine.triangle_count(); ++t) map[t] = t;
  const TriMesh* m = &fine;
  while (m != &coarse) {
    const TriMesh* up = m->parent().get();
    if (up == nullptr)
      throw std::invalid_argument(
          "ancestor_triangle_map: fine mesh does not descend from coarse mesh");
    for (auto& t : map) t = m->parent_of()[t];
    m = up;
  }
  return map;
}

}  // namespace pdesgd
