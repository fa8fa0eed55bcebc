#include "helfrich/mesh.hpp"

#include "helfrich/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace helfrich {

std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh) {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const Face& f : mesh.faces)
    for (int c = 0; c < 3; ++c) {
      int a = f[c], b = f[(c + 1) % 3];
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.vertices.size());
  for (const Face& f : mesh.faces)
    for (int c = 0; c < 3; ++c) {
      nb[f[c]].push_back(f[(c + 1) % 3]);
      nb[f[c]].push_back(f[(c + 2) % 3]);
    }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

std::vector<int> k_ring(const std::vector<std::vector<int>>& neighbors, int center, int rings) {
  std::vector<int> out{center};
  std::vector<int> frontier{center};
  std::vector<int> seen{center};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int v : frontier)
      for (int w : neighbors[v])
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          next.push_back(w);
          out.push_back(w);
        }
    frontier = std::move(next);
  }
  return out;
}

double bounding_box_diagonal(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const Vec3& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double face_area(const TriangleMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  const Vec3& a = mesh.vertices[t[0]];
  return 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
}

double degeneracy_tolerance(const TriangleMesh& mesh) {
  double d = bounding_box_diagonal(mesh);
  return 1e-14 * d * d;
}

TopologyReport validate_topology(const TriangleMesh& mesh) {
  TopologyReport r;
  r.V = mesh.vertices.size();
  r.F = mesh.faces.size();

  // Directed half-edge counts keyed by (min, max) with the orientation sign.
  std::map<std::pair<int, int>, std::array<int, 2>> use;
  std::vector<char> referenced(r.V, 0);
  bool indices_ok = true;
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      int a = f[c], b = f[(c + 1) % 3];
      if (a < 0 || b < 0 || a >= static_cast<int>(r.V) || b >= static_cast<int>(r.V) || a == b) {
        indices_ok = false;
        continue;
      }
      referenced[a] = 1;
      auto& slot = use[{std::min(a, b), std::max(a, b)}];
      ++slot[a < b ? 0 : 1];
    }
  }
  r.E = use.size();
  for (const auto& [edge, n] : use) {
    int total = n[0] + n[1];
    if (total == 1) ++r.boundary_edges;
    else if (total > 2) ++r.nonmanifold_edges;
    else if (n[0] != 1) ++r.inconsistent_edges;
  }
  r.isolated_vertices = static_cast<std::size_t>(std::count(referenced.begin(), referenced.end(), 0));
  r.chi = static_cast<long>(r.V) - static_cast<long>(r.E) + static_cast<long>(r.F);

  double tol = degeneracy_tolerance(mesh);
  r.min_face_area = std::numeric_limits<double>::infinity();
  if (indices_ok) {
    for (std::size_t f = 0; f < r.F; ++f) {
      double a = face_area(mesh, f);
      r.min_face_area = std::min(r.min_face_area, a);
      if (!(a >= tol)) ++r.degenerate_faces;
    }
  }
  if (r.F == 0) r.min_face_area = 0.0;

  r.closed = indices_ok && r.F > 0 && r.boundary_edges == 0 && r.nonmanifold_edges == 0;
  r.orientable = r.closed && r.inconsistent_edges == 0;
  r.pass = r.orientable && r.chi == 2 && r.isolated_vertices == 0 && r.degenerate_faces == 0;
  return r;
}

void require_valid(const TriangleMesh& mesh) {
  TopologyReport r = validate_topology(mesh);
  if (r.pass) return;
  if (r.closed && r.orientable && r.chi == 2 && r.degenerate_faces > 0) {
    double tol = degeneracy_tolerance(mesh);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
      if (!(face_area(mesh, f) >= tol))
        throw DegenerateGeometryError("degenerate triangle at face " + std::to_string(f), static_cast<long>(f));
  }
  throw PreconditionError("mesh is not a closed, consistently oriented genus-0 surface (chi=" +
                          std::to_string(r.chi) + ", boundary=" + std::to_string(r.boundary_edges) +
                          ", nonmanifold=" + std::to_string(r.nonmanifold_edges) +
                          ", flipped=" + std::to_string(r.inconsistent_edges) + ")");
}

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& linear, const Vec3& shift) {
  TriangleMesh out = mesh;
  for (Vec3& p : out.vertices) p = linear * p + shift;
  if (linear.determinant() < 0)
    for (Face& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

TriangleMesh scaled(const TriangleMesh& mesh, double s) {
  return transformed(mesh, s * Eigen::Matrix3d::Identity(), Vec3::Zero());
}

}  // namespace helfrich
