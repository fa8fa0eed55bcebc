#pragma once

#include "helfrich/mesh.hpp"
#include "helfrich/report.hpp"

#include <vector>

namespace helfrich {

/// Per-vertex discrete geometry. Sign convention: outward normal, so the unit
/// sphere has H = +1 and hvec = n.
struct VertexGeometry {
  std::vector<double> area;        // mixed Voronoi area A_i
  std::vector<Vec3> area_grad;     // G_i = dArea/dx_i = 1/2 sum (cot a + cot b)(x_i - x_j)
  std::vector<Vec3> normal_sum;    // sum of incident (b-a)x(c-a)
  std::vector<Vec3> normal;        // normalised normal_sum
  std::vector<Vec3> hvec;          // G_i / (2 A_i)
  std::vector<double> H;           // n_i . hvec_i
  std::vector<double> defect;      // 2 pi - sum of incident angles
};

/// Throws DegenerateGeometryError naming the first face below tolerance.
VertexGeometry vertex_geometry(const TriangleMesh& mesh);

double total_area(const TriangleMesh& mesh);

struct EnclosedVolume {
  double raw_flux = 0;  // sum over faces of centroid . (unit normal * area)
  double volume = 0;    // raw_flux / 3
};
EnclosedVolume enclosed_volume(const TriangleMesh& mesh);

/// Vertex-lumped sum A_i H_i^2.
double willmore_energy(const VertexGeometry& g);
double gauss_bonnet_sum(const VertexGeometry& g);

/// Max pairwise vertex distance.
double diameter(const TriangleMesh& mesh);

InequalityReport check_diameter_bound(const TriangleMesh& mesh);

/// Per-vertex k1^2 + k2^2 with (k1, k2) recovered from H and K = defect / A.
/// When H^2 < K the principal curvatures are taken equal to H.
std::vector<double> second_fundamental_density(const VertexGeometry& g);

/// lhs = sum A_i (k1^2 + k2^2), rhs = 4 sum A_i H_i^2 - 2 sum defect_i.
IdentityReport second_fundamental_identity(const TriangleMesh& mesh, double tol = 0.05);

struct IntersectionReport {
  std::size_t count = 0;
  long face_a = -1, face_b = -1;
  bool embedded() const { return count == 0; }
};

/// Counts pairs of faces with no shared vertex whose triangles intersect.
IntersectionReport self_intersection_check(const TriangleMesh& mesh);

void to_json(nlohmann::json& j, const IntersectionReport& r);

}  // namespace helfrich
