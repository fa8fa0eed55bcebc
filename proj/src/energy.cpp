#include "helfrich/energy.hpp"

#include "helfrich/errors.hpp"

#include <cmath>

namespace helfrich {

VolumeConvention parse_volume_convention(const std::string& s) {
  if (s == "flux") return VolumeConvention::flux;
  if (s == "geometric") return VolumeConvention::geometric;
  throw DomainError("volume convention must be 'flux' or 'geometric', got '" + s + "'");
}

std::string to_string(VolumeConvention c) { return c == VolumeConvention::flux ? "flux" : "geometric"; }

void EnergyParams::validate() const {
  if (!std::isfinite(c0) || !std::isfinite(alpha) || !std::isfinite(rho))
    throw DomainError("energy parameters must be finite");
  if (alpha < 0) throw DomainError("alpha must be >= 0");
  if (rho < 0) throw DomainError("rho must be >= 0");
}

EnergyBreakdown energy(const VertexGeometry& g, const EnclosedVolume& enclosed, const EnergyParams& p) {
  EnergyBreakdown e;
  for (std::size_t i = 0; i < g.area.size(); ++i) {
    e.willmore += g.area[i] * g.H[i] * g.H[i];
    e.cross += g.area[i] * g.H[i];
    e.area += g.area[i];
  }
  e.raw_flux = enclosed.raw_flux;
  e.volume = enclosed.volume;
  e.helfrich = e.willmore - 2.0 * p.c0 * e.cross + p.c0 * p.c0 * e.area;
  double pressure = p.convention == VolumeConvention::flux ? e.raw_flux : e.volume;
  e.general = e.helfrich + p.alpha * e.area + p.rho * pressure;
  return e;
}

EnergyBreakdown energy(const TriangleMesh& mesh, const EnergyParams& params) {
  params.validate();
  return energy(vertex_geometry(mesh), enclosed_volume(mesh), params);
}

InequalityReport check_willmore_helfrich_bound(const TriangleMesh& mesh, double c0, double A0) {
  EnergyParams p;
  p.c0 = c0;
  EnergyBreakdown e = energy(mesh, p);
  if (e.area > A0 * (1.0 + 1e-12))
    throw PreconditionError("mesh area " + std::to_string(e.area) + " exceeds A0 = " + std::to_string(A0));
  double rhs = 2.0 * e.helfrich + 2.0 * c0 * c0 * A0;
  return make_inequality("willmore_helfrich_bound", e.willmore, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
}

double willmore_mesh_deficit(const TriangleMesh& mesh) {
  // Level L icospheres carry 10 4^L + 2 vertices.
  const double nv = static_cast<double>(mesh.num_vertices());
  int level = 0;
  for (int l = 1; l <= 7; ++l)
    if (std::abs(10.0 * std::pow(4.0, l) + 2 - nv) < std::abs(10.0 * std::pow(4.0, level) + 2 - nv)) level = l;
  const double w = willmore_energy(vertex_geometry(gen_icosphere(level)));
  return std::max(0.0, 1.0 - w / (4.0 * M_PI));
}

InequalityReport check_willmore_lower_bound(const TriangleMesh& mesh, double delta_mesh) {
  const double w = willmore_energy(vertex_geometry(mesh));
  // Written as -W <= -4 pi (1 - delta) to reuse the lhs <= rhs form.
  return make_inequality("willmore_lower_bound", -w, -4.0 * M_PI * (1.0 - delta_mesh), 1e-12 * w);
}

bool isoperimetric_feasible(double A0, double V0) {
  return A0 * A0 * A0 >= 36.0 * M_PI * V0 * V0 * (1.0 - 1e-12);
}

double epsilon_embeddedness(double A0, double V0, double inf_willmore) {
  if (!(A0 > 0) || !(V0 > 0)) throw ConstraintViolationError("A0 and V0 must be positive");
  if (!isoperimetric_feasible(A0, V0))
    throw ConstraintViolationError("infeasible targets: A0^3 < 36 pi V0^2");
  // The top of the range is 4 pi up to rounding of the caller's arithmetic.
  if (!(inf_willmore >= 4.0 * M_PI * (1.0 - 1e-14)) || !(inf_willmore < 8.0 * M_PI))
    throw DomainError("inf_willmore must lie in [4 pi, 8 pi)");
  double inf = std::max(inf_willmore, 4.0 * M_PI);
  return (std::sqrt(8.0 * M_PI) - std::sqrt(inf)) / (2.0 * std::sqrt(A0));
}

EmbeddednessReport check_li_yau_embeddedness(const TriangleMesh& mesh, double tol) {
  EmbeddednessReport r;
  r.willmore = willmore_energy(vertex_geometry(mesh));
  r.margin = r.threshold - r.willmore;
  r.intersections = self_intersection_check(mesh);
  bool below = r.willmore < r.threshold * (1.0 - tol);
  if (below) {
    r.consistent = r.intersections.embedded();
    r.status = r.consistent ? "embedded" : "inconsistent";
  } else {
    r.status = r.intersections.embedded() ? "above-threshold" : "immersed-above-threshold";
  }
  return r;
}

void to_json(nlohmann::json& j, const EnergyParams& p) {
  j = {{"c0", p.c0}, {"alpha", p.alpha}, {"rho", p.rho}, {"volume_convention", to_string(p.convention)}};
}

void to_json(nlohmann::json& j, const EnergyBreakdown& e) {
  j = {{"willmore", e.willmore}, {"helfrich", e.helfrich}, {"cross", e.cross}, {"area", e.area},
       {"raw_flux", e.raw_flux}, {"volume", e.volume}, {"general", e.general}};
}

void to_json(nlohmann::json& j, const EmbeddednessReport& r) {
  j = {{"willmore", r.willmore}, {"threshold", r.threshold}, {"margin", r.margin},
       {"intersections", r.intersections}, {"status", r.status}, {"consistent", r.consistent}};
}

}  // namespace helfrich
