#include "helfrich/geometry.hpp"

#include "face_kernel.hpp"
#include "helfrich/errors.hpp"

#include <algorithm>
#include <cmath>

namespace helfrich {

VertexGeometry vertex_geometry(const TriangleMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  VertexGeometry g;
  g.area.assign(nv, 0.0);
  g.area_grad.assign(nv, Vec3::Zero());
  g.normal_sum.assign(nv, Vec3::Zero());
  g.defect.assign(nv, 2.0 * M_PI);

  const double tol = degeneracy_tolerance(mesh);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    const Vec3 p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    auto ft = detail::face_terms<double>(p);
    if (!(0.5 * ft.N.norm() >= tol))
      throw DegenerateGeometryError("degenerate triangle at face " + std::to_string(f), static_cast<long>(f));
    for (int c = 0; c < 3; ++c) {
      g.area[t[c]] += ft.mixed[c];
      g.area_grad[t[c]] += ft.area_grad[c];
      g.normal_sum[t[c]] += ft.N;
      const Vec3 u = p[(c + 1) % 3] - p[c], v = p[(c + 2) % 3] - p[c];
      g.defect[t[c]] -= std::atan2(u.cross(v).norm(), u.dot(v));
    }
  }

  g.normal.resize(nv);
  g.hvec.resize(nv);
  g.H.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!(g.area[i] > 0)) throw DegenerateGeometryError("vertex " + std::to_string(i) + " has no incident area");
    g.normal[i] = g.normal_sum[i].normalized();
    g.hvec[i] = g.area_grad[i] / (2.0 * g.area[i]);
    g.H[i] = g.normal[i].dot(g.hvec[i]);
  }
  return g;
}

double total_area(const TriangleMesh& mesh) {
  double a = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) a += face_area(mesh, f);
  return a;
}

EnclosedVolume enclosed_volume(const TriangleMesh& mesh) {
  EnclosedVolume e;
  for (const Face& t : mesh.faces) {
    const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    e.raw_flux += (a + b + c).dot((b - a).cross(c - a)) / 6.0;
  }
  e.volume = e.raw_flux / 3.0;
  return e;
}

double willmore_energy(const VertexGeometry& g) {
  double w = 0.0;
  for (std::size_t i = 0; i < g.area.size(); ++i) w += g.area[i] * g.H[i] * g.H[i];
  return w;
}

double gauss_bonnet_sum(const VertexGeometry& g) {
  double s = 0.0;
  for (double k : g.defect) s += k;
  return s;
}

double diameter(const TriangleMesh& mesh) {
  double best = 0.0;
  const auto& v = mesh.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, (v[i] - v[j]).squaredNorm());
  return std::sqrt(best);
}

InequalityReport check_diameter_bound(const TriangleMesh& mesh) {
  VertexGeometry g = vertex_geometry(mesh);
  double lhs = std::sqrt(total_area(mesh));
  double rhs = diameter(mesh) * std::sqrt(willmore_energy(g));
  return make_inequality("diameter_bound", lhs, rhs, 1e-12 * std::max(lhs, rhs));
}

std::vector<double> second_fundamental_density(const VertexGeometry& g) {
  std::vector<double> out(g.area.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double H = g.H[i], K = g.defect[i] / g.area[i];
    double disc = std::max(H * H - K, 0.0);
    double k1 = H + std::sqrt(disc), k2 = H - std::sqrt(disc);
    out[i] = k1 * k1 + k2 * k2;
  }
  return out;
}

IdentityReport second_fundamental_identity(const TriangleMesh& mesh, double tol) {
  VertexGeometry g = vertex_geometry(mesh);
  std::vector<double> ii = second_fundamental_density(g);
  double lhs = 0.0;
  for (std::size_t i = 0; i < ii.size(); ++i) lhs += g.area[i] * ii[i];
  double rhs = 4.0 * willmore_energy(g) - 2.0 * gauss_bonnet_sum(g);
  IdentityReport r = make_identity("second_fundamental_identity", lhs, rhs, tol, 0.0);
  r.extra["willmore"] = willmore_energy(g);
  r.extra["gauss_bonnet"] = gauss_bonnet_sum(g);
  return r;
}

}  // namespace helfrich
