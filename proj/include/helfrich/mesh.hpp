#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace helfrich {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Indexed triangle mesh of a closed surface. Faces are counter-clockwise
/// seen from outside.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
};

struct TopologyReport {
  std::size_t V = 0, E = 0, F = 0;
  long chi = 0;
  std::size_t boundary_edges = 0;
  std::size_t nonmanifold_edges = 0;
  std::size_t inconsistent_edges = 0;
  std::size_t isolated_vertices = 0;
  std::size_t degenerate_faces = 0;
  double min_face_area = 0.0;
  bool closed = false;
  bool orientable = false;
  bool pass = false;
};

/// Undirected edges (i < j) in first-seen order.
std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh);

/// Sorted one-ring neighbour lists.
std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh);

/// Vertices within `rings` edge hops of `center`, center first.
std::vector<int> k_ring(const std::vector<std::vector<int>>& neighbors, int center, int rings);

double bounding_box_diagonal(const TriangleMesh& mesh);
double face_area(const TriangleMesh& mesh, std::size_t f);

/// Area below which a face counts as degenerate: 1e-14 * bbox_diag^2.
double degeneracy_tolerance(const TriangleMesh& mesh);

TopologyReport validate_topology(const TriangleMesh& mesh);

/// Throws PreconditionError if the report fails and DegenerateGeometryError
/// naming the first face below the area tolerance.
void require_valid(const TriangleMesh& mesh);

TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& linear, const Vec3& shift);
TriangleMesh scaled(const TriangleMesh& mesh, double s);

// Generators.

struct GeneratorLimits {
  int max_level = 8;
};

TriangleMesh gen_icosphere(int level, double radius = 1.0, const GeneratorLimits& limits = {});
TriangleMesh gen_ellipsoid(double a, double b, double c, int level, const GeneratorLimits& limits = {});
TriangleMesh gen_tetrahedron();

/// Axis-aligned cube of edge 2 with every face split into an n x n grid.
TriangleMesh gen_cube(int n);

/// Thin ellipsoid bent around a circle until its ends pass through each other.
TriangleMesh gen_figure_eight(int level = 4);

struct NeckProfile {
  double big_radius = 0, small_radius = 0;
  double waist = 0;
  double u_big = 0, u_small = 0;        // catenoid parameters at the two tangency circles
  double center_big = 0, center_small = 0;
};

/// Radii 1 +- 1/k, waist min(2/k, small_radius/2), catenoid r = w cosh(z/w)
/// tangent to both spheres. The spheres sit side by side along z.
NeckProfile neck_profile(int k);

/// Surface of revolution through the profile above; `neck_samples` is the
/// azimuthal segment count, meridional spacing follows conformal coordinates.
TriangleMesh gen_two_sphere_neck(int k, int neck_samples = 64);

/// Moves every vertex radially about the centroid by a factor 1 + amplitude u,
/// u uniform in [-1, 1] from a mt19937_64 stream seeded with `seed`.
TriangleMesh perturbed(const TriangleMesh& mesh, double amplitude, std::uint64_t seed);

// I/O. Format inferred from the extension (.obj or .ply).

TriangleMesh load_mesh(const std::string& path);
void save_mesh(const TriangleMesh& mesh, const std::string& path);

/// ASCII PLY with additional per-vertex float64 properties.
void save_ply(const TriangleMesh& mesh, const std::string& path,
              const std::vector<std::pair<std::string, std::vector<double>>>& vertex_scalars = {});

}  // namespace helfrich
