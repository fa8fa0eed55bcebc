#pragma once

#include "helfrich/energy.hpp"

#include <array>
#include <string>
#include <vector>

namespace helfrich {

enum class PatchKind { sphere_cap, catenoid, plane };

PatchKind parse_patch_kind(const std::string& s);
std::string to_string(PatchKind k);

/// Analytic conformal patch over the unit disk.
///   sphere_cap: inverse stereographic map of w = scale * x onto the sphere of
///               the given radius, outward normal, north pole at x = 0.
///   catenoid:   (cosh u cos v, cosh u sin v, u) with u = scale x1 + offset,
///               v = scale x2.
///   plane:      scale * (x1, x2, 0).
struct PatchSpec {
  PatchKind kind = PatchKind::sphere_cap;
  double radius = 1.0;
  double scale = 0.5;
  double offset = 0.0;
};

/// Radius at which the round sphere is critical for the general energy:
/// c0 / r - c0^2 - alpha - kappa rho r / 2 = 0. Any radius is critical for
/// c0 = alpha = rho = 0; 1 is returned then. Throws DomainError if no
/// positive root exists.
double sphere_critical_radius(const EnergyParams& params);

/// Grid on [-1, 1]^2, n nodes per side, restricted to the closed unit disk.
/// Per-node fields use the chart's own normal d1 Phi x d2 Phi / |..| and
/// H = Hvec . n in that orientation.
struct DiskChart {
  PatchSpec patch;
  int n = 0;
  double h = 0;
  std::vector<int> index;                // n * n, -1 outside the disk
  std::vector<std::array<int, 2>> node;  // (i, j) of each disk node
  std::vector<Vec3> phi, normal, hvec;
  std::vector<double> lambda, H;
  double conformality_defect = 0;  // max relative | |d1|^2 - |d2|^2 | + 2 |d1 . d2|

  std::size_t size() const { return node.size(); }
  double x(int i) const { return -1.0 + i * h; }
  int at(int i, int j) const { return i < 0 || j < 0 || i >= n || j >= n ? -1 : index[i * n + j]; }
};

/// Throws PreconditionError for n < 33 and ResourceError above 1025.
DiskChart build_chart(const PatchSpec& patch, int n);

struct PotentialSet {
  std::vector<Vec3> V, X, L, R;
  std::vector<double> Y, S;
  /// Interior L2 norms of Delta_h u - source for V, X, Y.
  double poisson_residual_V = 0, poisson_residual_X = 0, poisson_residual_Y = 0;
  /// Half-radius L2 norms of the first-order relations defining L, R, S.
  double relation_L = 0, relation_R = 0, relation_S = 0;
  int iterations = 0;  // summed over every linear solve
};

/// V, X, Y from zero-Dirichlet 5-point solves; L, R, S from edge
/// least-squares inversions of grad-perp (a Neumann Poisson problem with the
/// measured curl as source), each shifted to zero mean.
/// Throws SolverError when conjugate gradients fail to reach 1e-12.
PotentialSet solve_potentials(const DiskChart& chart, const EnergyParams& params);

/// Recomputes R and S from the current L, X and Y.
void recover_rs(const DiskChart& chart, const EnergyParams& params, PotentialSet& pot);

/// grad-perp e = (-d2 e, d1 e) by centered differences at disk node k.
std::array<double, 2> perp_gradient(const DiskChart& chart, const std::vector<double>& f, int k);

enum ConservationEquation { eq_R = 0, eq_S = 1, eq_Y = 2, eq_Phi = 3 };
inline constexpr std::array<const char*, 4> kConservationNames = {"R", "S", "Y", "Phi"};

struct ConservationResiduals {
  int n = 0;
  std::array<double, 4> residual{};  // L2 over the half-radius subdisk
  double scale = 0;                  // L2 of Delta Phi over the same subdisk
  double relation_L = 0;
};

ConservationResiduals check_conservation_residuals(const DiskChart& chart, const PotentialSet& pot,
                                                   const EnergyParams& params);

struct ConservationStudy {
  PatchSpec patch;
  EnergyParams params;
  std::vector<ConservationResiduals> levels;
  std::array<double, 4> order{};
  std::array<bool, 4> at_floor{};   // fine residual below floor * scale
  std::array<bool, 4> converged{};  // order >= min_order or at_floor
  double relation_L_order = 0;
  double floor = 1e-9;
  double min_order = 1.5;
  bool all_converged = false;
  bool any_stalled = false;  // some equation with order < 0.5 above the floor
};

/// Residuals at two resolutions and their fitted order log(r_c / r_f) / log(h_c / h_f).
ConservationStudy conservation_study(const PatchSpec& patch, const EnergyParams& params, int n_coarse = 65,
                                     int n_fine = 129);

void to_json(nlohmann::json& j, const PatchSpec& p);
void to_json(nlohmann::json& j, const ConservationResiduals& r);
void to_json(nlohmann::json& j, const ConservationStudy& s);

}  // namespace helfrich
