#pragma once

#include "helfrich/energy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace helfrich {

/// `helfrich` denotes the general energy helfrich + alpha area + rho pressure.
enum class Functional { area, volume, raw_flux, total_mean_curvature, willmore, helfrich };

Functional parse_functional(const std::string& s);
std::string to_string(Functional f);

struct DiscreteGradient {
  Functional tag = Functional::area;
  std::vector<Vec3> g;

  double norm() const;
  Vec3 sum() const;
  /// sum x_i cross g_i.
  Vec3 moment(const TriangleMesh& mesh) const;
};

double functional_value(const TriangleMesh& mesh, Functional tag, const EnergyParams& params = {});
DiscreteGradient functional_gradient(const TriangleMesh& mesh, Functional tag, const EnergyParams& params = {});

DiscreteGradient grad_area(const TriangleMesh& mesh);
DiscreteGradient grad_volume(const TriangleMesh& mesh);
DiscreteGradient grad_raw_flux(const TriangleMesh& mesh);
DiscreteGradient grad_total_mean_curvature(const TriangleMesh& mesh);
DiscreteGradient grad_willmore(const TriangleMesh& mesh);
DiscreteGradient grad_helfrich(const TriangleMesh& mesh, const EnergyParams& params);

/// Value and gradient of the general energy in one pass.
double general_energy_and_gradient(const TriangleMesh& mesh, const EnergyParams& params, std::vector<Vec3>& grad);

struct GradCheckReport {
  Functional tag = Functional::area;
  int trials = 0;
  double h = 0;
  double max_rel_error = 0;
  std::vector<double> rel_errors;
  std::uint64_t seed = 0;
};

/// Compares g . w with (E(x + h w) - E(x - h w)) / 2h for random unit w,
/// h = 1e-6 * bbox diagonal. Relative error uses the denominator
/// max(|analytic|, |fd|, |g| / sqrt(n)).
GradCheckReport fd_gradient_check(const TriangleMesh& mesh, Functional tag, const EnergyParams& params, int trials,
                                  std::uint64_t seed = 12345);

/// jet: degree-6 height-function fit over the 4-ring of each vertex, with the
/// divergence-form density evaluated on the fitted tangent-plane chart.
/// dual_cell: flux of piecewise-linear cotan fields through the barycentric
/// dual cell.
enum class ELMethod { jet, dual_cell };

ELMethod parse_el_method(const std::string& s);
std::string to_string(ELMethod m);

struct ELResidual {
  ELMethod method = ELMethod::jet;
  std::vector<Vec3> r;          // cell-integrated residual, approximately dE/dx_i
  std::vector<double> density;  // |r_i| / A_i
  double l2 = 0;                // sqrt(sum A_i |r_i / A_i|^2)
};

/// Residual of the divergence-form Euler-Lagrange operator
///   -Delta hvec + div((3H/2 - c0) grad n) + div((2 c0 H - c0^2 - alpha) grad x)
///   + (1/2)(d hvec ^ dn) + kappa rho n,
/// written for the outward normal (kappa = params.volume_factor()).
ELResidual el_residual(const TriangleMesh& mesh, const EnergyParams& params, ELMethod method = ELMethod::jet);

/// lhs = sum_f A_f div_f X (piecewise-linear X), rhs = 2 sum_i A_i X_i . hvec_i.
IdentityReport divergence_identity_check(const TriangleMesh& mesh, const std::vector<Vec3>& X, double tol = 1e-10);

/// Normal-variation pairing of the exact total-mean-curvature gradient with
/// w = phi n against sum A_i phi_i (|II|^2/2 - 2 H^2)_i with the sign fixed
/// for the outward normal: d/dt int H = int phi (2 H^2 - |II|^2 / 2) = int phi K.
IdentityReport first_variation_tmc_check(const TriangleMesh& mesh, const std::vector<double>& phi, double tol = 0.05);

void to_json(nlohmann::json& j, const GradCheckReport& r);

}  // namespace helfrich
