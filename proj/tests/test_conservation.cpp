#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helfrich/conservation.hpp"
#include "helfrich/errors.hpp"
#include "support.hpp"

#include <cmath>

using namespace helfrich;

namespace {

EnergyParams params(double c0, double alpha = 0, double rho = 0) {
  EnergyParams p;
  p.c0 = c0;
  p.alpha = alpha;
  p.rho = rho;
  return p;
}

PatchSpec sphere(double r) {
  PatchSpec s;
  s.kind = PatchKind::sphere_cap;
  s.radius = r;
  return s;
}

// Discrete Laplacian of a scalar grid field at an interior node.
double laplacian(const DiskChart& c, const std::vector<double>& f, int k) {
  auto [i, j] = c.node[k];
  return (f[c.at(i + 1, j)] + f[c.at(i - 1, j)] + f[c.at(i, j + 1)] + f[c.at(i, j - 1)] - 4 * f[k]) / (c.h * c.h);
}

}  // namespace

TEST_CASE("critical radius of the sphere family") {
  CHECK(sphere_critical_radius(params(1, 1)) == doctest::Approx(0.49999999999999989).epsilon(1e-14));
  CHECK(sphere_critical_radius(params(0.5, 1, 0.5)) == doctest::Approx(0.33333333333333331).epsilon(1e-14));
  CHECK(sphere_critical_radius(params(0)) == 1.0);
  CHECK_THROWS_AS(sphere_critical_radius(params(-1, 1)), DomainError);
  CHECK_THROWS_AS(sphere_critical_radius(params(0, 1)), DomainError);
  EnergyParams g = params(0.5, 1, 1.5);
  g.convention = VolumeConvention::geometric;
  CHECK(sphere_critical_radius(g) == doctest::Approx(0.33333333333333331).epsilon(1e-14));
}

TEST_CASE("chart construction") {
  CHECK_THROWS_AS(build_chart(sphere(1), 16), PreconditionError);
  CHECK_THROWS_AS(build_chart(sphere(1), 2049), ResourceError);
  DiskChart s = build_chart(sphere(0.5), 65);
  CHECK(s.conformality_defect <= 1e-12);
  CHECK(s.h == doctest::Approx(2.0 / 64));
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto [i, j] = s.node[k];
    CHECK(s.x(i) * s.x(i) + s.x(j) * s.x(j) <= 1 + 1e-12);
    CHECK(s.at(i, j) == int(k));
    CHECK(std::abs(s.H[k] + 2.0) <= 1e-12);  // chart normal points inward
  }
  PatchSpec cat;
  cat.kind = PatchKind::catenoid;
  cat.offset = 0.3;
  DiskChart c = build_chart(cat, 65);
  CHECK(c.conformality_defect <= 1e-12);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c.hvec[k].norm() <= 1e-12);
  CHECK(parse_patch_kind(to_string(PatchKind::plane)) == PatchKind::plane);
  CHECK_THROWS_AS(parse_patch_kind("torus"), ValidationError);
}

TEST_CASE("grad-perp of a linear function") {
  DiskChart c = build_chart(sphere(1), 33);
  std::vector<double> f(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) f[k] = c.x(c.node[k][0]);
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto [i, j] = c.node[k];
    if (c.at(i + 1, j) < 0 || c.at(i - 1, j) < 0 || c.at(i, j + 1) < 0 || c.at(i, j - 1) < 0) continue;
    auto g = perp_gradient(c, f, int(k));
    CHECK(std::abs(g[0]) <= 1e-12);
    CHECK(std::abs(g[1] - 1.0) <= 1e-12);
  }
}

TEST_CASE("flat plane carries no stress") {
  PatchSpec p;
  p.kind = PatchKind::plane;
  DiskChart c = build_chart(p, 65);
  PotentialSet pot = solve_potentials(c, params(0));
  for (const Vec3& v : pot.V) CHECK(v.norm() <= 1e-12);
  ConservationResiduals r = check_conservation_residuals(c, pot, params(0));
  for (double x : r.residual) CHECK(x <= 1e-12);
}

TEST_CASE("critical sphere converges, off-critical sphere stalls") {
  const EnergyParams p = params(1, 1);
  ConservationStudy crit = conservation_study(sphere(sphere_critical_radius(p)), p);
  CHECK(crit.all_converged);
  CHECK_FALSE(crit.any_stalled);
  for (int e = 0; e < 4; ++e) {
    INFO(kConservationNames[e]);
    CHECK((crit.at_floor[e] || crit.order[e] >= 1.5));
  }
  CHECK(crit.relation_L_order >= 1.5);

  ConservationStudy off = conservation_study(sphere(0.55), p);
  CHECK(off.any_stalled);
  CHECK_FALSE(off.all_converged);
  CHECK(off.levels.back().residual[eq_R] > 3 * crit.levels.back().residual[eq_R]);
}

TEST_CASE("Willmore-critical catenoid") {
  PatchSpec cat;
  cat.kind = PatchKind::catenoid;
  cat.offset = 0.3;
  ConservationStudy s = conservation_study(cat, params(0));
  CHECK(s.all_converged);
}

TEST_CASE("residuals are blind to the potentials' additive constants") {
  const EnergyParams p = params(1, 1);
  DiskChart c = build_chart(sphere(0.5), 65);
  PotentialSet pot = solve_potentials(c, p);
  ConservationResiduals base = check_conservation_residuals(c, pot, p);
  PotentialSet shifted = pot;
  for (auto& r : shifted.R) r += Vec3(0.4, -1.1, 2.0);
  for (auto& s : shifted.S) s += 3.0;
  ConservationResiduals r = check_conservation_residuals(c, shifted, p);
  for (int e = 0; e < 4; ++e) CHECK(r.residual[e] == doctest::Approx(base.residual[e]).epsilon(1e-6));
}

TEST_CASE("a constant shift of L is absorbed by R and S") {
  const EnergyParams p = params(1, 1);
  ConservationResiduals fine[2];
  int level = 0;
  for (int n : {65, 129}) {
    DiskChart c = build_chart(sphere(0.5), n);
    PotentialSet pot = solve_potentials(c, p);
    for (auto& l : pot.L) l += Vec3(0.3, -0.7, 0.4);
    recover_rs(c, p, pot);
    fine[level++] = check_conservation_residuals(c, pot, p);
  }
  for (int e = 0; e < 4; ++e) {
    double order = std::log(fine[0].residual[e] / fine[1].residual[e]) / std::log(2.0);
    INFO(kConservationNames[e], " ", order);
    CHECK((order >= 1.5 || fine[1].residual[e] <= 1e-9 * fine[1].scale));
  }
}

TEST_CASE("S equation with frozen R") {
  // With R constant the S equation reduces to Delta S = 0 inside the subdisk.
  const EnergyParams p = params(1, 1);
  DiskChart c = build_chart(sphere(0.5), 65);
  PotentialSet pot = solve_potentials(c, p);
  for (auto& r : pot.R) r = Vec3(1, 2, 3);
  ConservationResiduals r = check_conservation_residuals(c, pot, p);
  double sum = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto [i, j] = c.node[k];
    if (c.x(i) * c.x(i) + c.x(j) * c.x(j) > 0.25) continue;
    double l = laplacian(c, pot.S, int(k));
    sum += l * l;
  }
  CHECK(r.residual[eq_S] == doctest::Approx(std::sqrt(c.h * c.h * sum)).epsilon(1e-10));
}

TEST_CASE("size mismatch is rejected") {
  DiskChart a = build_chart(sphere(0.5), 33), b = build_chart(sphere(0.5), 65);
  PotentialSet pot = solve_potentials(a, params(1, 1));
  CHECK_THROWS_AS(check_conservation_residuals(b, pot, params(1, 1)), PreconditionError);
}

TEST_CASE("study reports serialise") {
  ConservationStudy s = conservation_study(sphere(0.5), params(1, 1), 33, 65);
  nlohmann::json j = s;
  CHECK(j["equations"]["Phi"].contains("order"));
  CHECK(j["levels"].size() == 2u);
}
