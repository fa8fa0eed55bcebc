#pragma once

#include "helfrich/geometry.hpp"

#include <string>

namespace helfrich {

/// flux: the pressure term is rho * raw_flux. geometric: rho * volume.
enum class VolumeConvention { flux, geometric };

VolumeConvention parse_volume_convention(const std::string& s);
std::string to_string(VolumeConvention c);

struct EnergyParams {
  double c0 = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  VolumeConvention convention = VolumeConvention::flux;

  /// Throws DomainError unless alpha >= 0, rho >= 0 and all finite.
  void validate() const;
  /// Multiplier of the enclosed volume in the pressure term (3 for flux, 1 for geometric).
  double volume_factor() const { return convention == VolumeConvention::flux ? 3.0 : 1.0; }
};

struct EnergyBreakdown {
  double willmore = 0;
  double helfrich = 0;
  double cross = 0;  // total mean curvature sum A_i H_i
  double area = 0;
  double raw_flux = 0;
  double volume = 0;
  double general = 0;
};

EnergyBreakdown energy(const TriangleMesh& mesh, const EnergyParams& params);
EnergyBreakdown energy(const VertexGeometry& g, const EnclosedVolume& enclosed, const EnergyParams& params);

/// willmore <= 2 helfrich + 2 c0^2 A0. Requires area(mesh) <= A0.
InequalityReport check_willmore_helfrich_bound(const TriangleMesh& mesh, double c0, double A0);

/// 1 - W(icosphere) / 4 pi at the level whose vertex count is closest to
/// the mesh's, clamped at 0.
double willmore_mesh_deficit(const TriangleMesh& mesh);

/// willmore >= 4 pi (1 - delta_mesh).
InequalityReport check_willmore_lower_bound(const TriangleMesh& mesh, double delta_mesh);

/// (sqrt(8 pi) - sqrt(inf_willmore)) / (2 sqrt(A0)).
double epsilon_embeddedness(double A0, double V0, double inf_willmore);

/// A0^3 >= 36 pi V0^2 up to a relative rounding allowance.
bool isoperimetric_feasible(double A0, double V0);

struct EmbeddednessReport {
  double willmore = 0;
  double threshold = 8.0 * M_PI;
  double margin = 0;  // threshold - willmore
  IntersectionReport intersections;
  /// "embedded" (below threshold, no intersections), "above-threshold"
  /// (no claim), "immersed-above-threshold", or "inconsistent".
  std::string status;
  bool consistent = true;
};

EmbeddednessReport check_li_yau_embeddedness(const TriangleMesh& mesh, double tol = 1e-3);

void to_json(nlohmann::json& j, const EnergyParams& p);
void to_json(nlohmann::json& j, const EnergyBreakdown& e);
void to_json(nlohmann::json& j, const EmbeddednessReport& r);

}  // namespace helfrich
