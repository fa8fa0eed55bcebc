#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helfrich/errors.hpp"
#include "helfrich/variations.hpp"
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

double dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

const Functional kAll[] = {Functional::area, Functional::volume, Functional::raw_flux,
                           Functional::total_mean_curvature, Functional::willmore, Functional::helfrich};

}  // namespace

TEST_CASE("gradients match central differences") {
  const EnergyParams p = params(0.7, 0.3, 0.1);
  for (const TriangleMesh& m : {gen_icosphere(2), gen_ellipsoid(1.5, 1, 0.8, 2), perturbed(gen_icosphere(2), 0.1, 5)})
    for (Functional f : kAll) {
      GradCheckReport r = fd_gradient_check(m, f, p, 6);
      INFO(to_string(f));
      CHECK(r.max_rel_error <= 1e-5);
      CHECK(r.rel_errors.size() == 6u);
    }
  CHECK(fd_gradient_check(gen_icosphere(3), Functional::area, {}, 10).max_rel_error <= 1e-6);
  CHECK(fd_gradient_check(gen_ellipsoid(1.5, 1, 0.8, 3), Functional::helfrich, params(1), 10).max_rel_error <= 1e-5);
  CHECK(fd_gradient_check(gen_two_sphere_neck(4), Functional::willmore, {}, 5).max_rel_error <= 1e-4);
}

TEST_CASE("gradient check is seeded") {
  TriangleMesh m = gen_ellipsoid(1.5, 1, 0.8, 2);
  GradCheckReport a = fd_gradient_check(m, Functional::willmore, {}, 4, 77);
  GradCheckReport b = fd_gradient_check(m, Functional::willmore, {}, 4, 77);
  CHECK(a.rel_errors == b.rel_errors);
  CHECK(a.seed == 77u);
}

TEST_CASE("rigid motions are in the null space") {
  TriangleMesh m = perturbed(gen_ellipsoid(1.5, 1, 0.8, 3), 0.05, 11);
  const EnergyParams p = params(0.7, 0.3, 0.1);
  for (Functional f : kAll) {
    DiscreteGradient g = functional_gradient(m, f, p);
    INFO(to_string(f));
    double scale = g.norm() * std::sqrt(double(m.vertices.size()));
    CHECK(g.sum().norm() <= 1e-8 * scale);
    CHECK(g.moment(m).norm() <= 1e-8 * scale * diameter(m));
  }
}

TEST_CASE("sphere limits of area and volume gradients") {
  TriangleMesh m = gen_icosphere(4);
  VertexGeometry geo = vertex_geometry(m);
  DiscreteGradient ga = grad_area(m), gv = grad_volume(m);
  double ea = 0, ev = 0, total = 0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    ea = std::max(ea, (ga.g[i] - 2 * geo.area[i] * geo.normal[i]).norm() / (2 * geo.area[i]));
    ev += geo.area[i] * (gv.g[i] / geo.area[i] - geo.normal[i]).squaredNorm();
    total += geo.area[i];
  }
  CHECK(ea <= 0.03);
  // Area-weighted: at the twelve valence-5 vertices the Voronoi area differs
  // from the barycentric share by about 13% at every level.
  CHECK(std::sqrt(ev / total) <= 0.03);

  // A rotation field is tangent to the sphere; the volume does not see it.
  std::vector<Vec3> rot(m.vertices.size());
  for (std::size_t i = 0; i < rot.size(); ++i) rot[i] = Vec3(0.3, -1, 0.5).cross(m.vertices[i]);
  CHECK(std::abs(dot(gv.g, rot)) <= 1e-8 * gv.norm());
}

TEST_CASE("flat interior vertex is area critical") {
  // Hexagonal fan closed by a cone apex below: the centre vertex sits in a plane.
  TriangleMesh m;
  m.vertices.emplace_back(0, 0, 0);
  for (int k = 0; k < 6; ++k) m.vertices.emplace_back(std::cos(k * M_PI / 3), std::sin(k * M_PI / 3), 0);
  m.vertices.emplace_back(0, 0, -1);
  for (int k = 0; k < 6; ++k) {
    int a = 1 + k, b = 1 + (k + 1) % 6;
    m.faces.push_back({0, a, b});
    m.faces.push_back({7, b, a});
  }
  CHECK(grad_area(m).g[0].norm() <= 1e-12);
}

TEST_CASE("total mean curvature under dilation") {
  TriangleMesh m = gen_icosphere(4);
  DiscreteGradient g = grad_total_mean_curvature(m);
  double d = dot(g.g, m.vertices);  // d/dt of sum A H along (1 + t) x
  CHECK(test::rel(d, 4 * M_PI) <= 0.02);
  double t = 1e-4;
  double fd = (functional_value(scaled(m, 1 + t), Functional::total_mean_curvature) -
               functional_value(scaled(m, 1 - t), Functional::total_mean_curvature)) / (2 * t);
  CHECK(test::rel(d, fd) <= 1e-6);
}

TEST_CASE("first variation of total mean curvature") {
  std::vector<double> gaps;
  for (int level : {3, 4, 5}) {
    TriangleMesh m = gen_ellipsoid(1.3, 1, 0.9, level);
    std::vector<double> phi(m.vertices.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = 1 + 0.5 * m.vertices[i].x() * m.vertices[i].z();
    IdentityReport r = first_variation_tmc_check(m, phi);
    gaps.push_back(r.relative_gap);
  }
  CHECK(gaps[1] <= 0.05);
  CHECK(gaps[2] < gaps[0]);
}

TEST_CASE("assembly identity") {
  TriangleMesh m = gen_ellipsoid(1.5, 1, 0.8, 3);
  const EnergyParams p = params(0.7, 0.3, 0.1);
  DiscreteGradient gh = grad_helfrich(m, p), gw = grad_willmore(m), gt = grad_total_mean_curvature(m),
                   ga = grad_area(m), gf = grad_raw_flux(m);
  double worst = 0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    Vec3 e = gw.g[i] - 2 * p.c0 * gt.g[i] + (p.c0 * p.c0 + p.alpha) * ga.g[i] + p.rho * gf.g[i];
    worst = std::max(worst, (gh.g[i] - e).norm());
  }
  CHECK(worst <= 1e-12 * gh.norm());

  DiscreteGradient g0 = grad_helfrich(m, {});
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(g0.g[i] == gw.g[i]);

  std::vector<Vec3> g;
  double e = general_energy_and_gradient(m, p, g);
  CHECK(e == doctest::Approx(energy(m, p).general).epsilon(1e-14));
  for (std::size_t i = 0; i < g.size(); i += 17) CHECK((g[i] - gh.g[i]).norm() <= 1e-12 * gh.norm());
}

TEST_CASE("Helfrich gradient vanishes on the unit sphere with c0 = 1") {
  DiscreteGradient c = grad_helfrich(gen_icosphere(3), params(1));
  DiscreteGradient f = grad_helfrich(gen_icosphere(5), params(1));
  DiscreteGradient w = grad_willmore(gen_icosphere(5));
  CHECK(f.norm() < c.norm());
  CHECK(f.norm() <= 1e-2 * grad_area(gen_icosphere(5)).norm());
  (void)w;
}

TEST_CASE("Euler-Lagrange residual") {
  // Willmore-critical sphere: residual shrinks under refinement.
  double r3 = el_residual(gen_icosphere(3), {}).l2;
  double r5 = el_residual(gen_icosphere(5), {}).l2;
  CHECK(r5 * 2 <= r3);

  // Off the critical radius the residual tends to |dE/dr| / sqrt(4 pi r^2),
  // dE/dr = 8 pi (alpha r - c0 (1 - c0 r)).
  const EnergyParams p = params(1, 1, 0);
  const double r = 0.55, limit = 8 * M_PI * std::abs(r - (1 - r)) / (std::sqrt(4 * M_PI) * r);
  CHECK(test::rel(el_residual(gen_icosphere(5, r), p).l2, limit) <= 0.02);

  ELResidual d = el_residual(gen_icosphere(3), {}, ELMethod::dual_cell);
  CHECK(d.method == ELMethod::dual_cell);
  CHECK(d.r.size() == 642u);
  CHECK(parse_el_method("jet") == ELMethod::jet);
}

TEST_CASE("divergence identity") {
  TriangleMesh m = gen_icosphere(4);
  std::vector<Vec3> c(m.vertices.size(), Vec3(0.2, -1.0, 0.7));
  IdentityReport rc = divergence_identity_check(m, c);
  CHECK(std::abs(rc.lhs) <= 1e-8 * 4 * M_PI);
  CHECK(std::abs(rc.rhs) <= 1e-8 * 4 * M_PI);

  IdentityReport rp = divergence_identity_check(m, m.vertices, 0.02);
  CHECK(test::rel(std::abs(rp.lhs), 8 * M_PI) <= 0.02);
  CHECK(test::rel(std::abs(rp.rhs), 8 * M_PI) <= 0.02);

  std::vector<Vec3> rot(m.vertices.size());
  for (std::size_t i = 0; i < rot.size(); ++i) rot[i] = Vec3(0, 0, 1).cross(m.vertices[i]);
  IdentityReport rr = divergence_identity_check(m, rot);
  CHECK(std::abs(rr.lhs) <= 1e-6 * 8 * M_PI);
  CHECK(std::abs(rr.rhs) <= 1e-6 * 8 * M_PI);

  std::vector<Vec3> wrong(3);
  CHECK_THROWS_AS(divergence_identity_check(m, wrong), ValidationError);
}

TEST_CASE("functional names") {
  for (Functional f : kAll) CHECK(parse_functional(to_string(f)) == f);
  CHECK_THROWS_AS(parse_functional("gauss"), ValidationError);
}
