#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helfrich/energy.hpp"
#include "helfrich/errors.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace helfrich;

namespace {

std::vector<TriangleMesh> catalog() {
  return {gen_icosphere(3), gen_ellipsoid(1.5, 1, 0.8, 3), gen_ellipsoid(3, 1, 0.4, 3), gen_cube(4),
          gen_tetrahedron(), gen_two_sphere_neck(5), gen_figure_eight(), perturbed(gen_icosphere(3), 0.05, 3)};
}

EnergyParams params(double c0, double alpha = 0, double rho = 0) {
  EnergyParams p;
  p.c0 = c0;
  p.alpha = alpha;
  p.rho = rho;
  return p;
}

}  // namespace

TEST_CASE("breakdown expands the square") {
  for (const TriangleMesh& m : catalog())
    for (double c0 : {-2.0, -0.3, 0.0, 1.0, 4.0}) {
      EnergyBreakdown e = energy(m, params(c0, 0.7, 0.2));
      double expanded = e.willmore - 2 * c0 * e.cross + c0 * c0 * e.area;
      CHECK(std::abs(e.helfrich - expanded) <= 1e-10 * std::max(1.0, std::abs(e.helfrich)));
      CHECK(e.general == doctest::Approx(e.helfrich + 0.7 * e.area + 0.2 * e.raw_flux).epsilon(1e-14));
    }
}

TEST_CASE("geometric convention uses the enclosed volume") {
  TriangleMesh m = gen_ellipsoid(1.5, 1, 0.8, 3);
  EnergyParams p = params(0.5, 0.0, 0.4);
  p.convention = VolumeConvention::geometric;
  EnergyBreakdown e = energy(m, p);
  CHECK(e.general == doctest::Approx(e.helfrich + 0.4 * e.volume).epsilon(1e-14));
  CHECK(parse_volume_convention("flux") == VolumeConvention::flux);
  CHECK_THROWS_AS(parse_volume_convention("cubic"), DomainError);
}

TEST_CASE("unit sphere values") {
  TriangleMesh m = gen_icosphere(4);
  CHECK(energy(m, params(1.0)).helfrich <= 0.05);
  CHECK(test::rel(energy(m, params(0.0)).willmore, 4 * M_PI) <= 0.01);
  for (const TriangleMesh& c : catalog()) {
    EnergyBreakdown e = energy(c, params(0.0));
    CHECK(e.general == e.willmore);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(0, -1).validate(), DomainError);
  CHECK_THROWS_AS(params(0, 0, -1).validate(), DomainError);
  CHECK_THROWS_AS(params(NAN).validate(), DomainError);
  CHECK_NOTHROW(params(-5, 0, 0).validate());
}

TEST_CASE("Willmore-Helfrich bound") {
  TriangleMesh m = gen_icosphere(4);
  double A0 = total_area(m);
  InequalityReport r1 = check_willmore_helfrich_bound(m, 1.0, A0);
  CHECK(r1.pass);
  CHECK(test::rel(r1.lhs, 4 * M_PI) <= 0.01);
  CHECK(test::rel(r1.rhs, 8 * M_PI) <= 0.01);
  InequalityReport r0 = check_willmore_helfrich_bound(m, 0.0, A0);
  CHECK(r0.pass);
  CHECK(r0.rhs == doctest::Approx(2 * r0.lhs).epsilon(1e-14));
  CHECK_THROWS_AS(check_willmore_helfrich_bound(m, 1.0, 0.5 * A0), PreconditionError);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> axis(0.5, 2.0);
  for (int t = 0; t < 6; ++t) {
    TriangleMesh e = gen_ellipsoid(axis(rng), axis(rng), axis(rng), 3);
    for (double c0 : {-1.0, 0.5, 2.0}) CHECK(check_willmore_helfrich_bound(e, c0, total_area(e)).pass);
  }
}

TEST_CASE("embeddedness threshold") {
  const double A0 = 4 * M_PI;
  CHECK(epsilon_embeddedness(A0, A0 / 3, 4 * M_PI) == doctest::Approx(0.20710678118654752).epsilon(1e-15));
  double top = epsilon_embeddedness(A0, A0 / 3, 8 * M_PI - 1e-9);
  CHECK(top > 0);
  CHECK(top < 1e-9);
  CHECK(epsilon_embeddedness(4 * A0, 1.0, 5 * M_PI) ==
        doctest::Approx(0.5 * epsilon_embeddedness(A0, 1.0, 5 * M_PI)).epsilon(1e-14));
  CHECK_THROWS_AS(epsilon_embeddedness(A0, A0, 4 * M_PI), ConstraintViolationError);
  CHECK_THROWS_AS(epsilon_embeddedness(A0, 1.0, 3 * M_PI), DomainError);
  CHECK_THROWS_AS(epsilon_embeddedness(A0, 1.0, 8 * M_PI), DomainError);
  CHECK(isoperimetric_feasible(A0, A0 / 3));
  CHECK_FALSE(isoperimetric_feasible(A0, 1.01 * A0 / 3));
}

TEST_CASE("Li-Yau consistency") {
  EmbeddednessReport s = check_li_yau_embeddedness(gen_icosphere(3));
  CHECK(s.status == "embedded");
  CHECK(s.consistent);
  CHECK(s.margin > 4 * M_PI * 0.9);

  EmbeddednessReport n = check_li_yau_embeddedness(gen_two_sphere_neck(6));
  CHECK(n.margin == doctest::Approx(8 * M_PI - n.willmore));
  CHECK(n.consistent);

  EmbeddednessReport f = check_li_yau_embeddedness(gen_figure_eight());
  CHECK(f.willmore > 8 * M_PI);
  CHECK(f.intersections.count > 0);
  CHECK(f.consistent);
  CHECK(f.status == "immersed-above-threshold");
}

TEST_CASE("scale behaviour") {
  for (const TriangleMesh& m : catalog()) {
    for (double s : {0.5, 3.0}) {
      TriangleMesh ms = scaled(m, s);
      CHECK(test::rel(energy(ms, params(0)).willmore, energy(m, params(0)).willmore) <= 1e-10);
      CHECK(test::rel(energy(ms, params(0.8 / s)).helfrich, energy(m, params(0.8)).helfrich) <= 1e-10);
    }
  }
}

TEST_CASE("4 pi lower bound up to the mesh deficit") {
  for (const TriangleMesh& m : catalog()) {
    if (m.vertices.size() < 12) continue;  // below the coarsest calibration level
    double delta = willmore_mesh_deficit(m);
    CHECK(delta >= 0);
    CHECK(delta < 0.1);
    CHECK(check_willmore_lower_bound(m, delta).pass);
  }
  // The icosphere itself sits exactly on its own deficit.
  TriangleMesh ico = gen_icosphere(3);
  InequalityReport r = check_willmore_lower_bound(ico, willmore_mesh_deficit(ico));
  CHECK(r.pass);
  CHECK(std::abs(r.slack) <= 1e-9);

  // Four vertices are too coarse for the lumped energy to respect the bound.
  TriangleMesh tet = gen_tetrahedron();
  CHECK(energy(tet, params(0)).willmore < 0.4 * 4 * M_PI);
  CHECK_FALSE(check_willmore_lower_bound(tet, willmore_mesh_deficit(tet)).pass);
}
