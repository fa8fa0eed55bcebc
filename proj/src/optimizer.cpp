#include "helfrich/optimizer.hpp"

#include "helfrich/errors.hpp"
#include "helfrich/variations.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace helfrich {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Vec3 centroid(const TriangleMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : mesh.vertices) c += p;
  return c / static_cast<double>(mesh.vertices.size());
}

double dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

struct Values {
  double energy = 0, willmore = 0, area = 0, volume = 0;
};

Values values(const TriangleMesh& mesh, const EnergyParams& params) {
  const VertexGeometry g = vertex_geometry(mesh);
  const EnclosedVolume ev = enclosed_volume(mesh);
  const EnergyBreakdown e = energy(g, ev, params);
  return {e.general, e.willmore, e.area, e.volume};
}

struct Evaluation {
  Values v;
  std::vector<Vec3> g, gA, gV;
};

Evaluation evaluate(const TriangleMesh& mesh, const EnergyParams& params, bool constraint_grads) {
  Evaluation ev;
  ev.v = values(mesh, params);
  general_energy_and_gradient(mesh, params, ev.g);
  if (constraint_grads) {
    ev.gA = grad_area(mesh).g;
    ev.gV = grad_volume(mesh).g;
  }
  return ev;
}

struct Violation {
  double area = 0, volume = 0;
  double max() const { return std::max(std::abs(area), std::abs(volume)); }
};

Violation violation(const Values& v, const ConstraintSpec& c) { return {v.area / c.A0 - 1.0, v.volume / c.V0 - 1.0}; }

void check_constraints(const ConstraintSpec& c) {
  if (!std::isfinite(c.A0) || !std::isfinite(c.V0) || c.A0 <= 0 || c.V0 <= 0)
    throw DomainError("constraint targets must be positive and finite");
  if (!c.feasible())
    throw ConstraintViolationError("infeasible targets: A0^3 < 36 pi V0^2 (A0=" + num(c.A0) + ", V0=" + num(c.V0) +
                                   ")");
}

// Augmented Lagrangian with multipliers in absolute units and the penalty on
// relative violations c: L = E - lambda . (A - A0, V - V0) + sum mu_k c_k^2 / 2.
double al_merit(const Values& v, const ConstraintSpec& c, const FlowState& s) {
  Violation d = violation(v, c);
  return v.energy - s.lambda_A * (v.area - c.A0) - s.lambda_V * (v.volume - c.V0) +
         0.5 * s.mu_A * d.area * d.area + 0.5 * s.mu_V * d.volume * d.volume;
}

}  // namespace

double ConstraintSpec::isoperimetric_ratio() const { return 36.0 * M_PI * V0 * V0 / (A0 * A0 * A0); }

ConstraintSpec ConstraintSpec::from_ratio(double A0, double ratio) {
  if (!(ratio > 0 && ratio <= 1)) throw DomainError("isoperimetric ratio must lie in (0, 1]");
  if (!(A0 > 0) || !std::isfinite(A0)) throw DomainError("A0 must be positive");
  return {A0, std::sqrt(ratio * A0 * A0 * A0 / (36.0 * M_PI))};
}

TriangleMesh project_constraints(const TriangleMesh& mesh, const ConstraintSpec& c, double tol, int max_steps) {
  check_constraints(c);
  auto violations = [&](const TriangleMesh& m) {
    return Eigen::Vector2d(total_area(m) / c.A0 - 1.0, enclosed_volume(m).volume / c.V0 - 1.0);
  };
  Eigen::Vector2d r = violations(mesh);
  if (r.allFinite() && r.cwiseAbs().maxCoeff() <= tol) return mesh;

  // Shape direction: gradient of log(ratio) = 2 grad V / V - 3 grad A / A.
  // The bare area gradient becomes orthogonal to it along constrained flows.
  const Vec3 center = centroid(mesh);
  const std::vector<Vec3> gA0 = grad_area(mesh).g, gV0 = grad_volume(mesh).g;
  const double A_in = total_area(mesh), V_in = enclosed_volume(mesh).volume;
  std::vector<Vec3> rel(mesh.vertices.size()), dir(mesh.vertices.size());
  double gmax = 0.0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    rel[i] = mesh.vertices[i] - center;
    dir[i] = 2.0 * gV0[i] / V_in - 3.0 * gA0[i] / A_in;
    gmax = std::max(gmax, dir[i].norm());
  }
  if (gmax > 0)
    for (Vec3& d : dir) d /= gmax;

  // The isoperimetric ratio ignores s, so t is found first by a 1-D Newton
  // solve on the ratio; s then matches the area in closed form (area ~ s^2).
  TriangleMesh out = mesh;
  auto place = [&](double s, double t) {
    for (std::size_t i = 0; i < rel.size(); ++i) out.vertices[i] = center + s * (rel[i] + t * dir[i]);
  };
  const double target = c.isoperimetric_ratio();
  double A = 0, V = 0;
  auto ratio_residual = [&](double t) {
    place(1.0, t);
    A = total_area(out);
    V = enclosed_volume(out).volume;
    return 36.0 * M_PI * V * V / (A * A * A) / target - 1.0;
  };

  double t = 0.0;
  double f = ratio_residual(t);
  for (int k = 0; k < max_steps && std::isfinite(f) && std::abs(f) > 1e-15; ++k) {
    const std::vector<Vec3> gA = grad_area(out).g, gV = grad_volume(out).g;
    const double slope = (1.0 + f) * (2.0 * dot(gV, dir) / V - 3.0 * dot(gA, dir) / A);
    if (!(std::abs(slope) > 0)) break;
    const double delta = -f / slope;
    double lam = 1.0, ft = f;
    bool moved = false;
    for (int h = 0; h < 40; ++h, lam *= 0.5) {
      try {
        ft = ratio_residual(t + lam * delta);
      } catch (const NumericalError&) {
        continue;
      }
      if (std::isfinite(ft) && std::abs(ft) < std::abs(f)) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    t += lam * delta;
    f = ft;
  }

  ratio_residual(t);
  const double s = std::sqrt(c.A0 / A);
  place(s, t);
  r = violations(out);
  if (r.allFinite() && r.cwiseAbs().maxCoeff() <= tol) return out;
  throw ProjectionFailedError("constraint projection did not converge", r[0], r[1]);
}

// Tangential Laplacian smoothing: the umbrella vector with its normal part
// removed, so the surface moves within itself to first order.
static void tangential_smooth(TriangleMesh& mesh, double tau) {
  const VertexGeometry g = vertex_geometry(mesh);
  const auto nb = vertex_neighbors(mesh);
  std::vector<Vec3> next = mesh.vertices;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    Vec3 avg = Vec3::Zero();
    for (int j : nb[i]) avg += mesh.vertices[j];
    Vec3 d = avg / static_cast<double>(nb[i].size()) - mesh.vertices[i];
    d -= d.dot(g.normal[i]) * g.normal[i];
    next[i] += tau * d;
  }
  mesh.vertices = std::move(next);
}

static int delaunay_flips(TriangleMesh& mesh) {
  using Key = std::pair<int, int>;
  auto key = [](int a, int b) { return Key{std::min(a, b), std::max(a, b)}; };
  std::map<Key, std::vector<int>> edge_faces;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    for (int c = 0; c < 3; ++c) edge_faces[key(mesh.faces[f][c], mesh.faces[f][(c + 1) % 3])].push_back(int(f));
  std::vector<int> degree(mesh.vertices.size(), 0);
  for (const auto& [e, fs] : edge_faces) {
    ++degree[e.first];
    ++degree[e.second];
  }
  std::vector<Key> order;
  for (const auto& [e, fs] : edge_faces) order.push_back(e);

  const double tol = degeneracy_tolerance(mesh);
  const auto& X = mesh.vertices;
  auto opposite = [&](int f, int a, int b) {
    for (int v : mesh.faces[f])
      if (v != a && v != b) return v;
    return -1;
  };
  auto angle = [&](int at, int p, int q) {
    Vec3 u = X[p] - X[at], v = X[q] - X[at];
    return std::atan2(u.cross(v).norm(), u.dot(v));
  };
  int flips = 0;
  for (const Key& e : order) {
    auto it = edge_faces.find(e);
    if (it == edge_faces.end() || it->second.size() != 2) continue;
    int f1 = it->second[0], f2 = it->second[1];
    // Orient so that f1 carries a -> b.
    int a = e.first, b = e.second;
    {
      const Face& F = mesh.faces[f1];
      bool ab = false;
      for (int k = 0; k < 3; ++k)
        if (F[k] == a && F[(k + 1) % 3] == b) ab = true;
      if (!ab) std::swap(a, b);
    }
    const int c = opposite(f1, a, b), d = opposite(f2, a, b);
    if (c < 0 || d < 0 || c == d || edge_faces.count(key(c, d))) continue;
    if (degree[a] <= 3 || degree[b] <= 3) continue;
    if (angle(c, a, b) + angle(d, a, b) <= M_PI + 1e-10) continue;
    const Face n1{a, d, c}, n2{d, b, c};
    const Vec3 N1 = (X[d] - X[a]).cross(X[c] - X[a]);
    const Vec3 N2 = (X[b] - X[d]).cross(X[c] - X[d]);
    const Vec3 old = (X[b] - X[a]).cross(X[c] - X[a]) + (X[a] - X[b]).cross(X[d] - X[b]);
    if (0.5 * N1.norm() < tol || 0.5 * N2.norm() < tol) continue;
    if (N1.dot(N2) <= 0 || N1.dot(old) <= 0 || N2.dot(old) <= 0) continue;

    mesh.faces[f1] = n1;
    mesh.faces[f2] = n2;
    edge_faces.erase(it);
    edge_faces[key(c, d)] = {f1, f2};
    auto relink = [&](int p, int q, int from, int to) {
      for (int& f : edge_faces[key(p, q)])
        if (f == from) f = to;
    };
    relink(a, d, f2, f1);  // a-d moved from f2 to f1
    relink(b, c, f1, f2);  // b-c moved from f1 to f2
    --degree[a];
    --degree[b];
    ++degree[c];
    ++degree[d];
    ++flips;
  }
  return flips;
}

int maintain_mesh(TriangleMesh& mesh, double smoothing) {
  if (smoothing > 0) tangential_smooth(mesh, smoothing);
  return delaunay_flips(mesh);
}

namespace {

struct Flow {
  const EnergyParams& params;
  const std::optional<ConstraintSpec>& constraints;
  const OptimizerOptions& opts;
  FlowState& s;

  void record(const Values& v) {
    s.energy = v.energy;
    s.energy_history.push_back(v.energy);
    s.willmore_history.push_back(v.willmore);
    if (constraints) {
      Violation d = violation(v, *constraints);
      s.area_violation = std::abs(d.area);
      s.volume_violation = std::abs(d.volume);
    }
    s.area_violation_history.push_back(s.area_violation);
    s.volume_violation_history.push_back(s.volume_violation);
  }

  bool try_project(TriangleMesh& mesh) {
    try {
      mesh = project_constraints(mesh, *constraints, opts.projection_tol, opts.projection_max_steps);
      return true;
    } catch (const NumericalError&) {
      return false;
    }
  }

  void halt_bubbling(const TriangleMesh& last_good) {
    s.status = "bubbling-suspected";
    try {
      s.bubbles = bubbling_diagnostics(last_good, opts.bubbling, s.initial_curvature_diameter);
    } catch (const NumericalError&) {
    }
  }

  void enter_al(const Evaluation& ev) {
    s.mode = "augmented-lagrangian";
    if (s.mu_A <= 0) s.mu_A = opts.mu0;
    if (s.mu_V <= 0) s.mu_V = opts.mu0;
    s.round_iteration = 0;
    s.round_start_energy = al_merit(ev.v, *constraints, s);
  }

  // Descent direction and its squared norm for the active mode.
  std::vector<Vec3> direction(const Evaluation& ev) {
    std::vector<Vec3> p = ev.g;
    if (s.mode == "projected") {
      Eigen::Matrix2d M;
      M << dot(ev.gA, ev.gA), dot(ev.gA, ev.gV), dot(ev.gV, ev.gA), dot(ev.gV, ev.gV);
      Eigen::Vector2d rhs(dot(ev.gA, ev.g), dot(ev.gV, ev.g));
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
      svd.setThreshold(1e-12);
      Eigen::Vector2d lam = svd.solve(rhs);
      s.lambda_A = lam[0];
      s.lambda_V = lam[1];
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lam[0] * ev.gA[i] + lam[1] * ev.gV[i];
    } else if (s.mode == "augmented-lagrangian") {
      Violation d = violation(ev.v, *constraints);
      double wa = -s.lambda_A + s.mu_A * d.area / constraints->A0;
      double wv = -s.lambda_V + s.mu_V * d.volume / constraints->V0;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += wa * ev.gA[i] + wv * ev.gV[i];
    }
    return p;
  }

  double merit(const Values& v) const {
    return s.mode == "augmented-lagrangian" ? al_merit(v, *constraints, s) : v.energy;
  }

  // Outer multiplier update; returns true once the run should stop.
  bool al_round_end(const Values& v) {
    Violation d = violation(v, *constraints);
    const double viol = d.max();
    s.lambda_A -= s.mu_A * d.area / constraints->A0;
    s.lambda_V -= s.mu_V * d.volume / constraints->V0;
    bool stalled = s.last_round_violation >= 0 && viol > 0.25 * s.last_round_violation;
    if (stalled) {
      s.mu_A = std::min(s.mu_A * 10.0, opts.mu_max);
      s.mu_V = std::min(s.mu_V * 10.0, opts.mu_max);
    }
    s.last_round_violation = s.last_round_violation < 0 ? viol : std::min(viol, s.last_round_violation);
    ++s.rounds;
    s.round_iteration = 0;
    s.round_start_energy = al_merit(v, *constraints, s);
    return stalled && s.mu_A >= opts.mu_max && s.mu_V >= opts.mu_max && viol > 1e-6 &&
           s.rounds > 3 && s.area_violation_history.size() > 1;
  }

  void run() {
    const bool constrained = constraints.has_value();
    Evaluation ev;
    try {
      ev = evaluate(s.mesh, params, constrained);
    } catch (const DegenerateGeometryError&) {
      halt_bubbling(s.mesh);
      return;
    }
    if (s.energy_history.empty()) record(ev.v);
    std::vector<Vec3> p = direction(ev);
    double pn2 = dot(p, p);
    if (s.initial_grad_norm <= 0) s.initial_grad_norm = std::sqrt(pn2);
    TriangleMesh trial;
    // Previous iterate and direction for the Barzilai-Borwein trial step.
    std::vector<Vec3> prev_x, prev_p;

    while (true) {
      s.grad_norm = std::sqrt(pn2);
      const bool feasible_now = !constrained || (s.area_violation <= 1e-6 && s.volume_violation <= 1e-6);
      if (s.grad_norm <= opts.gtol * s.initial_grad_norm && feasible_now) {
        s.status = "converged";
        return;
      }
      if (s.iteration >= opts.max_iterations) {
        s.status = "max-iterations";
        return;
      }
      const std::size_t n = s.energy_history.size();
      const int w = opts.stagnation_window;
      if (w > 0 && s.mode != "augmented-lagrangian" && n > s.mode_start + static_cast<std::size_t>(w)) {
        double drop = s.energy_history[n - 1 - w] - s.energy_history[n - 1];
        if (drop <= opts.ftol * std::max(1.0, std::abs(s.energy_history.back()))) {
          s.status = "stagnated";
          return;
        }
      }

      ++s.iteration;
      const double m0 = merit(ev.v);
      double t = 4.0 * s.step;
      if (!prev_x.empty()) {
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
          const Vec3 dx = s.mesh.vertices[i] - prev_x[i];
          ss += dx.squaredNorm();
          sy += dx.dot(p[i] - prev_p[i]);
        }
        if (sy > 0 && std::isfinite(ss / sy)) t = ss / sy;
      }
      bool accepted = false;
      Values tv;
      for (; t >= opts.min_step; t *= 0.5) {
        trial = s.mesh;
        for (std::size_t i = 0; i < p.size(); ++i) trial.vertices[i] -= t * p[i];
        if (s.mode == "projected" && !try_project(trial)) continue;
        try {
          tv = values(trial, params);
        } catch (const DegenerateGeometryError&) {
          continue;
        }
        if (std::isfinite(tv.energy) && merit(tv) <= m0 - opts.armijo * t * pn2) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (s.mode == "augmented-lagrangian" && s.round_iteration > 0) {
          if (al_round_end(ev.v)) {
            s.status = "stagnated";
            return;
          }
          p = direction(ev);
          pn2 = dot(p, p);
          continue;
        }
        s.status = "line-search-failed";
        return;
      }
      s.step = t;
      prev_x = std::move(s.mesh.vertices);
      prev_p = p;
      s.mesh = std::move(trial);
      ++s.accepted;
      ++s.round_iteration;

      if (opts.maintenance_every > 0 && s.accepted % opts.maintenance_every == 0) {
        TriangleMesh before = s.mesh;
        try {
          maintain_mesh(s.mesh, opts.smoothing);
          require_valid(s.mesh);
          if (s.mode == "projected" && !try_project(s.mesh)) s.mesh = before;
        } catch (const Error&) {
          s.mesh = before;
        }
        s.maintenance_iterations.push_back(s.iteration);
        prev_x.clear();
        if (opts.detect_bubbling) {
          BubblingReport br = bubbling_diagnostics(s.mesh, opts.bubbling, s.initial_curvature_diameter);
          if (br.flagged) {
            s.bubbles = br;
            s.status = "bubbling-suspected";
            ev.v = values(s.mesh, params);
            record(ev.v);
            return;
          }
        }
      }

      try {
        ev = evaluate(s.mesh, params, constrained);
      } catch (const DegenerateGeometryError&) {
        halt_bubbling(s.mesh);
        return;
      }
      record(ev.v);

      if (s.mode == "augmented-lagrangian") {
        Violation d = violation(ev.v, *constraints);
        bool round_done = s.round_iteration >= opts.al_inner_iterations;
        if (round_done) {
          if (al_round_end(ev.v)) {
            s.status = "stagnated";
            return;
          }
          // Recover exact feasibility when the targets come within reach.
          TriangleMesh probe = s.mesh;
          if (d.max() < 0.05 && try_project(probe)) {
            s.mesh = std::move(probe);
            s.mode = "projected";
            prev_x.clear();
            ev = evaluate(s.mesh, params, constrained);
            record(ev.v);
            s.mode_start = s.energy_history.size() - 1;
          }
        }
      }

      if (opts.checkpoint_every > 0 && !opts.checkpoint_prefix.empty() && s.iteration % opts.checkpoint_every == 0)
        save_checkpoint(s, opts.checkpoint_prefix);

      p = direction(ev);
      pn2 = dot(p, p);
    }
  }
};

}  // namespace

FlowState resume(FlowState state, const EnergyParams& params, const std::optional<ConstraintSpec>& constraints,
                 const OptimizerOptions& opts) {
  params.validate();
  if (constraints) check_constraints(*constraints);
  require_valid(state.mesh);
  state.status = "running";
  Flow flow{params, constraints, opts, state};
  flow.run();
  return state;
}

FlowState minimize(const TriangleMesh& mesh0, const EnergyParams& params, const std::optional<ConstraintSpec>& constraints,
                   const OptimizerOptions& opts) {
  params.validate();
  if (constraints) check_constraints(*constraints);
  if (opts.max_iterations < 0 || !(opts.gtol >= 0) || !(opts.min_step > 0) || !(opts.armijo > 0 && opts.armijo < 1))
    throw DomainError("invalid optimizer options");
  require_valid(mesh0);

  FlowState s;
  s.mesh = mesh0;
  s.status = "running";
  s.seed = opts.seed;
  s.initial_curvature_diameter = min_curvature_diameter(mesh0);
  Flow flow{params, constraints, opts, s};
  if (!constraints) {
    s.mode = "unconstrained";
  } else if (flow.try_project(s.mesh)) {
    s.mode = "projected";
  } else {
    s.mesh = mesh0;
    flow.enter_al(evaluate(s.mesh, params, true));
  }
  flow.run();
  return s;
}

TriangleMesh prolate_initializer(double ratio, double A0, int level, double* aspect) {
  if (!(ratio > 0 && ratio <= 1)) throw DomainError("isoperimetric ratio must lie in (0, 1]");
  // Analytic isoperimetric ratio of the spheroid (e, 1, 1), decreasing in e.
  auto spheroid_ratio = [](double e) {
    if (e <= 1.0 + 1e-12) return 1.0;
    const double ecc = std::sqrt(1.0 - 1.0 / (e * e));
    const double area = 2.0 * M_PI * (1.0 + e * std::asin(ecc) / ecc);
    const double vol = 4.0 * M_PI * e / 3.0;
    return 36.0 * M_PI * vol * vol / (area * area * area);
  };
  double lo = 1.0, hi = 2.0;
  while (spheroid_ratio(hi) > ratio) {
    hi *= 2.0;
    if (hi > 1e6) throw DomainError("isoperimetric ratio too small for the prolate initializer");
  }
  for (int k = 0; k < 200 && ratio < 1.0; ++k) {
    double mid = 0.5 * (lo + hi);
    (spheroid_ratio(mid) > ratio ? lo : hi) = mid;
  }
  const double e = ratio < 1.0 ? 0.5 * (lo + hi) : 1.0;
  if (aspect) *aspect = e;
  TriangleMesh m = gen_ellipsoid(e, 1.0, 1.0, level);
  return scaled(m, std::sqrt(A0 / total_area(m)));
}

std::vector<SweepRow> isoperimetric_sweep(const std::vector<double>& ratios, const EnergyParams& params,
                                          const SweepOptions& opts) {
  params.validate();
  std::vector<double> rs = ratios;
  for (double r : rs)
    if (!(r > 0 && r <= 1)) throw DomainError("isoperimetric ratio must lie in (0, 1], got " + num(r));
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  if (opts.workers < 1) throw DomainError("workers must be >= 1");

  std::vector<SweepRow> rows(rs.size());
  std::vector<std::exception_ptr> errors(rs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t k; (k = next.fetch_add(1)) < rs.size();) {
      try {
        SweepRow& row = rows[k];
        ConstraintSpec c = ConstraintSpec::from_ratio(opts.A0, rs[k]);
        double aspect = 1.0;
        TriangleMesh m0 = prolate_initializer(rs[k], opts.A0, opts.level, &aspect);
        FlowState st = minimize(m0, params, c, opts.optimizer);
        Values v = values(st.mesh, params);
        EnergyBreakdown e = energy(st.mesh, params);
        row.ratio = rs[k];
        row.A0 = c.A0;
        row.V0 = c.V0;
        row.willmore = e.willmore;
        row.helfrich = e.helfrich;
        row.area = v.area;
        row.volume = v.volume;
        row.area_violation = st.area_violation;
        row.volume_violation = st.volume_violation;
        row.lambda_A = st.lambda_A;
        row.lambda_V = st.lambda_V;
        row.iterations = st.iteration;
        row.status = st.status;
        row.mode = st.mode;
        row.initializer = "prolate(aspect=" + num(aspect) + ",level=" + std::to_string(opts.level) + ")";
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int nthreads = std::min<int>(opts.workers, static_cast<int>(std::max<std::size_t>(rs.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "ratio,A0,V0,willmore,helfrich,area,volume,area_violation,volume_violation,lambda_A,lambda_V,iterations,"
         "status,mode,initializer\n";
  for (const SweepRow& r : rows)
    out << num(r.ratio) << ',' << num(r.A0) << ',' << num(r.V0) << ',' << num(r.willmore) << ',' << num(r.helfrich)
        << ',' << num(r.area) << ',' << num(r.volume) << ',' << num(r.area_violation) << ','
        << num(r.volume_violation) << ',' << num(r.lambda_A) << ',' << num(r.lambda_V) << ',' << r.iterations << ','
        << r.status << ',' << r.mode << ",\"" << r.initializer << "\"\n";
  return out.str();
}

std::string energy_history_csv(const FlowState& s) {
  std::ostringstream out;
  out << "index,energy,willmore,area_violation,volume_violation\n";
  for (std::size_t i = 0; i < s.energy_history.size(); ++i)
    out << i << ',' << num(s.energy_history[i]) << ',' << num(s.willmore_history[i]) << ','
        << num(s.area_violation_history[i]) << ',' << num(s.volume_violation_history[i]) << '\n';
  return out.str();
}

void to_json(nlohmann::json& j, const ConstraintSpec& c) {
  j = {{"A0", c.A0}, {"V0", c.V0}, {"feasible", c.feasible()}, {"isoperimetric_ratio", c.isoperimetric_ratio()}};
}

void to_json(nlohmann::json& j, const FlowState& s) {
  j = {{"mode", s.mode},
       {"status", s.status},
       {"lambda_A", s.lambda_A},
       {"lambda_V", s.lambda_V},
       {"mu_A", s.mu_A},
       {"mu_V", s.mu_V},
       {"iteration", s.iteration},
       {"accepted", s.accepted},
       {"step", s.step},
       {"energy", s.energy},
       {"grad_norm", s.grad_norm},
       {"initial_grad_norm", s.initial_grad_norm},
       {"area_violation", s.area_violation},
       {"volume_violation", s.volume_violation},
       {"maintenance_count", s.maintenance_iterations.size()},
       {"bubbling_flagged", s.bubbles.has_value() && s.bubbles->flagged}};
  if (s.bubbles) j["bubbles"] = *s.bubbles;
}

void save_checkpoint(const FlowState& s, const std::string& prefix) {
  save_ply(s.mesh, prefix + ".ply");
  nlohmann::json j = s;
  j["seed"] = s.seed;
  j["energy_history"] = s.energy_history;
  j["willmore_history"] = s.willmore_history;
  j["area_violation_history"] = s.area_violation_history;
  j["volume_violation_history"] = s.volume_violation_history;
  j["maintenance_iterations"] = s.maintenance_iterations;
  j["initial_curvature_diameter"] = s.initial_curvature_diameter;
  j["round_iteration"] = s.round_iteration;
  j["mode_start"] = s.mode_start;
  j["round_start_energy"] = s.round_start_energy;
  j["last_round_violation"] = s.last_round_violation;
  j["rounds"] = s.rounds;
  std::ofstream f(prefix + ".json");
  if (!f) throw PreconditionError("cannot write checkpoint " + prefix + ".json");
  f << j.dump(2) << '\n';
}

FlowState load_checkpoint(const std::string& prefix) {
  std::ifstream f(prefix + ".json");
  if (!f) throw PreconditionError("cannot read checkpoint " + prefix + ".json");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(prefix + ".json", 0, e.what());
  }
  FlowState s;
  s.mesh = load_mesh(prefix + ".ply");
  s.mode = j.at("mode").get<std::string>();
  s.status = j.at("status").get<std::string>();
  s.lambda_A = j.at("lambda_A");
  s.lambda_V = j.at("lambda_V");
  s.mu_A = j.at("mu_A");
  s.mu_V = j.at("mu_V");
  s.iteration = j.at("iteration");
  s.accepted = j.at("accepted");
  s.step = j.at("step");
  s.energy = j.at("energy");
  s.initial_grad_norm = j.at("initial_grad_norm");
  s.area_violation = j.at("area_violation");
  s.volume_violation = j.at("volume_violation");
  s.energy_history = j.at("energy_history").get<std::vector<double>>();
  s.willmore_history = j.at("willmore_history").get<std::vector<double>>();
  s.area_violation_history = j.at("area_violation_history").get<std::vector<double>>();
  s.volume_violation_history = j.at("volume_violation_history").get<std::vector<double>>();
  s.maintenance_iterations = j.at("maintenance_iterations").get<std::vector<int>>();
  s.initial_curvature_diameter = j.at("initial_curvature_diameter");
  s.round_iteration = j.at("round_iteration");
  s.mode_start = j.at("mode_start");
  s.round_start_energy = j.at("round_start_energy");
  s.last_round_violation = j.at("last_round_violation");
  s.rounds = j.at("rounds");
  s.seed = j.at("seed");
  return s;
}

}  // namespace helfrich
