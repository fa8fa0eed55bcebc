// Acceptance checks. One PASS/FAIL line per criterion; tolerances are fixed
// here and echoed in the output.

#include "helfrich/conservation.hpp"
#include "helfrich/optimizer.hpp"
#include "helfrich/variations.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace helfrich;

namespace {

constexpr double kFourPi = 4.0 * M_PI;

// Criterion 1
constexpr int kSphereLevel = 5;
constexpr double kSphereTol = 0.005;
// Criterion 2
constexpr double kGaussBonnetTol = 1e-8;
// Criterion 3
constexpr double kGradTol = 1e-5;
constexpr int kGradTrials = 10;
// Criterion 4
constexpr double kFlowWillmoreFactor = 1.01;
constexpr double kFlowViolationTol = 1e-6;
// Criterion 5
constexpr double kBubbleFinalFraction = 0.25;
constexpr double kBubbleTargetTol = 0.05;
// Criterion 6
constexpr double kELDecrease = 2.0;
constexpr double kELOffFloor = 0.5;
constexpr double kELOffFactor = 1.1;
// Criterion 7
constexpr double kConsRadiusFactor = 1.1;
// Criterion 8
constexpr int kCatalogSize = 20;
constexpr std::uint64_t kCatalogSeed = 2024;

EnergyParams params(double c0, double alpha = 0, double rho = 0) {
  EnergyParams p;
  p.c0 = c0;
  p.alpha = alpha;
  p.rho = rho;
  return p;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

void report(int id, bool pass, const std::string& detail) {
  lines.push_back({id, pass, detail});
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion1() {
  double w = energy(gen_icosphere(kSphereLevel), {}).willmore;
  double r = w / kFourPi;
  report(1, std::abs(r - 1) <= kSphereTol, fmt("icosphere(%d) W/4pi = %.6f, tol %.3g", kSphereLevel, r, kSphereTol));
}

std::vector<std::pair<std::string, TriangleMesh>> catalog() {
  return {{"icosphere(0)", gen_icosphere(0)},
          {"icosphere(3)", gen_icosphere(3)},
          {"icosphere(5)", gen_icosphere(5)},
          {"ellipsoid(1.5,1,0.8)", gen_ellipsoid(1.5, 1, 0.8, 3)},
          {"ellipsoid(3,1,0.3)", gen_ellipsoid(3, 1, 0.3, 4)},
          {"tetrahedron", gen_tetrahedron()},
          {"cube(6)", gen_cube(6)},
          {"figure_eight", gen_figure_eight()},
          {"two_sphere_neck(2)", gen_two_sphere_neck(2)},
          {"two_sphere_neck(12)", gen_two_sphere_neck(12)},
          {"perturbed icosphere(3)", perturbed(gen_icosphere(3), 0.2, 1)}};
}

void criterion2() {
  double worst = 0;
  std::string where;
  for (const auto& [name, m] : catalog()) {
    double err = std::abs(gauss_bonnet_sum(vertex_geometry(m)) - kFourPi);
    if (err >= worst) worst = err, where = name;
  }
  report(2, worst <= kGaussBonnetTol,
         fmt("max |sum defects - 4pi| = %.3g on %s over %zu meshes, tol %.0e", worst, where.c_str(), catalog().size(),
             kGaussBonnetTol));
}

void criterion3() {
  const Functional tags[] = {Functional::area, Functional::volume, Functional::total_mean_curvature,
                             Functional::willmore, Functional::helfrich};
  const EnergyParams p = params(0.7, 0.3, 0.1);
  double worst = 0;
  std::string where;
  for (const auto& [name, m] :
       std::vector<std::pair<std::string, TriangleMesh>>{{"icosphere(3)", gen_icosphere(3)},
                                                         {"ellipsoid(1.5,1,0.8)", gen_ellipsoid(1.5, 1, 0.8, 3)}})
    for (Functional f : tags) {
      double e = fd_gradient_check(m, f, p, kGradTrials).max_rel_error;
      if (e >= worst) worst = e, where = name + " " + to_string(f);
    }
  report(3, worst <= kGradTol,
         fmt("max FD relative error %.3g (%s), %d directions, helfrich at c0=0.7 alpha=0.3 rho=0.1, tol %.0e", worst,
             where.c_str(), kGradTrials, kGradTol));
}

// Start shared by criteria 4 and 9.
TriangleMesh flow_start() {
  TriangleMesh m = gen_ellipsoid(1.2, 1.0, 0.85, 3);
  m = scaled(m, std::sqrt(kFourPi / total_area(m)));
  return perturbed(m, 0.01, 7);
}

FlowState flow_run(const ConstraintSpec& c) { return minimize(flow_start(), {}, c, OptimizerOptions{}); }

std::string flow_history_a;

void criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  const ConstraintSpec c{kFourPi, kFourPi / 3.0};
  FlowState s = flow_run(c);
  flow_history_a = energy_history_csv(s);
  const double w = energy(s.mesh, {}).willmore;
  const IntersectionReport x = self_intersection_check(s.mesh);
  const bool pass = w <= kFlowWillmoreFactor * kFourPi && s.area_violation <= kFlowViolationTol &&
                    s.volume_violation <= kFlowViolationTol && x.embedded();
  report(4, pass,
         fmt("targets (4pi, 4pi/3): W/4pi = %.5f (max %.2f), area viol %.2e, volume viol %.2e (max %.0e), "
             "intersections %zu, mode %s, status %s, %d iterations, %.1f s",
             w / kFourPi, kFlowWillmoreFactor, s.area_violation, s.volume_violation, kFlowViolationTol, x.count,
             s.mode.c_str(), s.status.c_str(), s.iteration, seconds_since(t0)));
  if (!pass) {
    // Any closed polyhedron has isoperimetric ratio < 1, so the literal
    // targets are out of reach; show the same run with reachable targets.
    TriangleMesh ico = gen_icosphere(3);
    const double ico_ratio =
        36.0 * M_PI * std::pow(enclosed_volume(ico).volume, 2) / std::pow(total_area(ico), 3);
    const ConstraintSpec f = ConstraintSpec::from_ratio(kFourPi, 0.999 * ico_ratio);
    FlowState v = flow_run(f);
    const double wv = energy(v.mesh, {}).willmore;
    std::printf("  info: reachable targets (ratio %.6f): W/4pi = %.5f, area viol %.2e, volume viol %.2e, "
                "intersections %zu, mode %s, status %s\n",
                f.isoperimetric_ratio(), wv / kFourPi, v.area_violation, v.volume_violation,
                self_intersection_check(v.mesh).count, v.mode.c_str(), v.status.c_str());
  }
}

void criterion5() {
  const EnergyParams p = params(1.0);
  std::vector<double> helf;
  double worst_a = 0, worst_v = 0;
  for (int k = 2; k <= 12; ++k) {
    TriangleMesh m = gen_two_sphere_neck(k);
    EnergyBreakdown e = energy(m, p);
    const double r1 = 1.0 + 1.0 / k, r2 = 1.0 - 1.0 / k;
    const double a0 = kFourPi * (r1 * r1 + r2 * r2), v0 = kFourPi / 3.0 * (r1 * r1 * r1 + r2 * r2 * r2);
    worst_a = std::max(worst_a, std::abs(e.area - a0) / a0);
    worst_v = std::max(worst_v, std::abs(e.volume - v0) / v0);
    helf.push_back(e.helfrich);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < helf.size(); ++i) decreasing = decreasing && helf[i] < helf[i - 1];
  const double frac = helf.back() / helf.front();
  report(5, decreasing && frac < kBubbleFinalFraction && worst_a <= kBubbleTargetTol && worst_v <= kBubbleTargetTol,
         fmt("helfrich %.4f -> %.4f, strictly decreasing %s, k=12/k=2 = %.3f (max %.2f), area err %.3f, "
             "volume err %.3f (max %.2f)",
             helf.front(), helf.back(), decreasing ? "yes" : "no", frac, kBubbleFinalFraction, worst_a, worst_v,
             kBubbleTargetTol));
}

void criterion6() {
  bool pass = true;
  std::string detail;
  for (const EnergyParams& p : {params(0, 0, 0), params(1, 1, 0), params(0.5, 1, 0.5)}) {
    const double r = sphere_critical_radius(p);
    const double c4 = el_residual(gen_icosphere(4, r), p).l2;
    const double c6 = el_residual(gen_icosphere(6, r), p).l2;
    const bool ok = c4 >= kELDecrease * c6;
    pass = pass && ok;
    detail += fmt("(%g,%g,%g) r*=%.4f %.3g->%.3g x%.1f; ", p.c0, p.alpha, p.rho, r, c4, c6, c4 / c6);
    if (p.c0 != 0) {
      const double o4 = el_residual(gen_icosphere(4, kELOffFactor * r), p).l2;
      const double o6 = el_residual(gen_icosphere(6, kELOffFactor * r), p).l2;
      const bool off_ok = o6 >= kELOffFloor * o4;
      pass = pass && off_ok;
      detail += fmt("off %.3g->%.3g (%.0f%%); ", o4, o6, 100.0 * o6 / o4);
    }
  }
  detail += fmt("need x%.0f critical, >= %.0f%% off", kELDecrease, 100 * kELOffFloor);
  report(6, pass, detail);
}

void criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  const EnergyParams p = params(1, 1, 0);
  PatchSpec crit;
  crit.radius = sphere_critical_radius(p);
  PatchSpec ctrl = crit;
  ctrl.radius *= kConsRadiusFactor;
  ConservationStudy a = conservation_study(crit, p, 65, 129);
  ConservationStudy b = conservation_study(ctrl, p, 65, 129);
  std::string detail = "critical orders";
  for (int e = 0; e < 4; ++e) detail += fmt(" %s %.2f", kConservationNames[e], a.order[e]);
  detail += "; control orders";
  for (int e = 0; e < 4; ++e) detail += fmt(" %s %.2f", kConservationNames[e], b.order[e]);
  detail += fmt("; need >= %.1f and some < 0.5; %.1f s", a.min_order, seconds_since(t0));
  report(7, a.all_converged && b.any_stalled, detail);
}

void criterion8() {
  std::mt19937_64 rng(kCatalogSeed);
  std::uniform_real_distribution<double> axis(0.5, 2.0), curv(-2.0, 2.0);
  int fails = 0;
  double min_slack[3] = {INFINITY, INFINITY, INFINITY};
  for (int t = 0; t < kCatalogSize; ++t) {
    const double a = axis(rng), b = axis(rng), c = axis(rng), c0 = curv(rng);
    TriangleMesh m = gen_ellipsoid(a, b, c, 3);
    InequalityReport r[3] = {check_diameter_bound(m), check_willmore_helfrich_bound(m, c0, total_area(m)),
                             check_willmore_lower_bound(m, willmore_mesh_deficit(m))};
    for (int i = 0; i < 3; ++i) {
      fails += r[i].pass ? 0 : 1;
      min_slack[i] = std::min(min_slack[i], r[i].slack / std::max(1.0, std::abs(r[i].rhs)));
    }
  }
  report(8, fails == 0,
         fmt("%d random ellipsoids (seed %llu), %d failures; min relative slack diameter %.3g, "
             "willmore-helfrich %.3g, lower bound %.3g",
             kCatalogSize, static_cast<unsigned long long>(kCatalogSeed), fails, min_slack[0], min_slack[1],
             min_slack[2]));
}

void criterion9() {
  const ConstraintSpec c{kFourPi, kFourPi / 3.0};
  const std::string second = energy_history_csv(flow_run(c));
  const bool same = !flow_history_a.empty() && second == flow_history_a;
  report(9, same, fmt("criterion 4 rerun: history CSVs %s (%zu bytes)", same ? "identical" : "differ", second.size()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(int(i) + 1, false, std::string("threw: ") + e.what());
    }
  }
  int failed = 0;
  for (const Line& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", lines.size(), failed);
  return failed == 0 ? 0 : 1;
}
