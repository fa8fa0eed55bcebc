#include "helfrich/conservation.hpp"

#include "helfrich/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <limits>

namespace helfrich {

PatchKind parse_patch_kind(const std::string& s) {
  if (s == "sphere_cap") return PatchKind::sphere_cap;
  if (s == "catenoid") return PatchKind::catenoid;
  if (s == "plane") return PatchKind::plane;
  throw DomainError("unknown patch kind '" + s + "' (sphere_cap, catenoid, plane)");
}

std::string to_string(PatchKind k) {
  switch (k) {
    case PatchKind::sphere_cap: return "sphere_cap";
    case PatchKind::catenoid: return "catenoid";
    case PatchKind::plane: return "plane";
  }
  return "?";
}

double sphere_critical_radius(const EnergyParams& params) {
  params.validate();
  const double a = 0.5 * params.volume_factor() * params.rho;
  const double b = params.c0 * params.c0 + params.alpha;
  const double c0 = params.c0;
  if (c0 == 0 && b == 0 && a == 0) return 1.0;
  if (!(c0 > 0)) throw DomainError("no critical round sphere: requires c0 > 0 unless c0 = alpha = rho = 0");
  // c0 - b r - a r^2 = 0, positive root written without cancellation.
  return 2.0 * c0 / (b + std::sqrt(b * b + 4.0 * a * c0));
}

namespace {

using Vec2 = Eigen::Vector2d;
using AD = Eigen::AutoDiffScalar<Vec2>;
using Vec3AD = Eigen::Matrix<AD, 3, 1>;

struct Point {
  Vec3 phi, n, hvec;
  double H = 0;
};

template <class S>
Eigen::Matrix<S, 3, 1> immersion(const PatchSpec& p, const S& x1, const S& x2) {
  using std::cos;
  using std::cosh;
  using std::sin;
  switch (p.kind) {
    case PatchKind::sphere_cap: {
      S w1 = p.scale * x1, w2 = p.scale * x2;
      S q = w1 * w1 + w2 * w2;
      S d = 1.0 + q;
      return Eigen::Matrix<S, 3, 1>(p.radius * 2.0 * w1 / d, p.radius * 2.0 * w2 / d, p.radius * (1.0 - q) / d);
    }
    case PatchKind::catenoid: {
      S u = p.scale * x1 + p.offset, v = p.scale * x2;
      return Eigen::Matrix<S, 3, 1>(cosh(u) * cos(v), cosh(u) * sin(v), u);
    }
    case PatchKind::plane:
      return Eigen::Matrix<S, 3, 1>(p.scale * x1, p.scale * x2, S(0.0));
  }
  return {};
}

Point evaluate(const PatchSpec& p, double x1, double x2) {
  Point pt;
  pt.phi = immersion<double>(p, x1, x2);
  switch (p.kind) {
    case PatchKind::sphere_cap:
      pt.n = pt.phi / p.radius;
      pt.hvec = -pt.n / p.radius;
      pt.H = -1.0 / p.radius;
      break;
    case PatchKind::catenoid: {
      double u = p.scale * x1 + p.offset, v = p.scale * x2;
      pt.n = Vec3(-std::cos(v), -std::sin(v), std::sinh(u)) / std::cosh(u);
      pt.hvec.setZero();
      break;
    }
    case PatchKind::plane:
      pt.n = Vec3::UnitZ();
      pt.hvec.setZero();
      break;
  }
  return pt;
}

/// Exact first derivatives of the immersion at (x1, x2).
std::array<Vec3, 2> jacobian(const PatchSpec& p, double x1, double x2) {
  AD a1(x1, 2, 0), a2(x2, 2, 1);
  Vec3AD f = immersion<AD>(p, a1, a2);
  std::array<Vec3, 2> d;
  for (int c = 0; c < 3; ++c) {
    d[0][c] = f[c].derivatives()[0];
    d[1][c] = f[c].derivatives()[1];
  }
  return d;
}

/// Analytic quantities differentiated with centered differences of step h.
struct Terms {
  std::vector<std::array<Vec3, 2>> dphi, dn, T;
  std::vector<Vec3> W, lap_phi;
};

/// Conventions of the disk system: chart normal, H = Hvec . n. The library's
/// c0 refers to the outward normal with H > 0 on spheres, so the chart sees -c0;
/// the pressure enters with the enclosed-volume weight.
struct ChartParams {
  double c0, alpha, rho;
};

ChartParams chart_params(const EnergyParams& p) { return {-p.c0, p.alpha, p.volume_factor() * p.rho}; }

Vec3 perp_of(const std::array<Vec3, 2>& d, int i) { return i == 0 ? Vec3(-d[1]) : d[0]; }

Terms analytic_terms(const DiskChart& c, const EnergyParams& params) {
  const ChartParams cp = chart_params(params);
  const double h = c.h;
  const PatchSpec& p = c.patch;
  auto diff = [&](double x1, double x2, int i) {
    double e1 = i == 0 ? h : 0, e2 = i == 1 ? h : 0;
    Point a = evaluate(p, x1 + e1, x2 + e2), b = evaluate(p, x1 - e1, x2 - e2);
    Point d;
    d.phi = (a.phi - b.phi) / (2 * h);
    d.n = (a.n - b.n) / (2 * h);
    d.hvec = (a.hvec - b.hvec) / (2 * h);
    return d;
  };
  // Flux whose divergence is the Willmore operator.
  auto flux = [&](double x1, double x2, int i) {
    Point pt = evaluate(p, x1, x2);
    Point di = diff(x1, x2, i);
    Point dj = diff(x1, x2, 1 - i);
    Vec3 perp_n = i == 0 ? Vec3(-dj.n) : dj.n;
    return Vec3(0.5 * (2 * di.hvec - 3 * pt.H * di.n + pt.hvec.cross(perp_n)));
  };

  Terms t;
  const std::size_t m = c.size();
  t.dphi.resize(m);
  t.dn.resize(m);
  t.T.resize(m);
  t.W.resize(m);
  t.lap_phi.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double x1 = c.x(c.node[k][0]), x2 = c.x(c.node[k][1]);
    for (int i = 0; i < 2; ++i) {
      Point d = diff(x1, x2, i);
      t.dphi[k][i] = d.phi;
      t.dn[k][i] = d.n;
    }
    const double coef = 2 * cp.c0 * c.H[k] - cp.c0 * cp.c0 - cp.alpha;
    for (int i = 0; i < 2; ++i)
      t.T[k][i] = cp.c0 * t.dn[k][i] + coef * t.dphi[k][i] - 0.5 * cp.rho * c.phi[k].cross(perp_of(t.dphi[k], i));
    t.W[k] = (flux(x1 + h, x2, 0) - flux(x1 - h, x2, 0) + flux(x1, x2 + h, 1) - flux(x1, x2 - h, 1)) / (2 * h);
    Vec3 s = Vec3::Zero();
    for (auto [a, b] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) s += evaluate(p, x1 + a, x2 + b).phi;
    t.lap_phi[k] = (s - 4 * c.phi[k]) / (h * h);
  }
  return t;
}

template <class T>
T zero_of() {
  if constexpr (std::is_same_v<T, double>)
    return 0.0;
  else
    return T::Zero();
}

/// Grid fields vanish off the disk, which is the zero-Dirichlet extension.
template <class T>
T value(const DiskChart& c, const std::vector<T>& f, int i, int j) {
  int k = c.at(i, j);
  return k < 0 ? zero_of<T>() : f[k];
}

template <class T>
std::array<T, 2> grad(const DiskChart& c, const std::vector<T>& f, int k) {
  auto [i, j] = c.node[k];
  return {T((value(c, f, i + 1, j) - value(c, f, i - 1, j)) / (2 * c.h)),
          T((value(c, f, i, j + 1) - value(c, f, i, j - 1)) / (2 * c.h))};
}

template <class T>
T laplacian(const DiskChart& c, const std::vector<T>& f, int k) {
  auto [i, j] = c.node[k];
  return T((value(c, f, i + 1, j) + value(c, f, i - 1, j) + value(c, f, i, j + 1) + value(c, f, i, j - 1) - 4.0 * f[k]) /
           (c.h * c.h));
}

bool in_subdisk(const DiskChart& c, int k) {
  double x1 = c.x(c.node[k][0]), x2 = c.x(c.node[k][1]);
  return x1 * x1 + x2 * x2 <= 0.25 + 1e-12;
}

bool strictly_inside(const DiskChart& c, int k) {
  double x1 = c.x(c.node[k][0]), x2 = c.x(c.node[k][1]);
  return x1 * x1 + x2 * x2 < 1.0 - 1e-12;
}

double sq(double v) { return v * v; }
double sq(const Vec3& v) { return v.squaredNorm(); }

using SpMat = Eigen::SparseMatrix<double>;

class LinearSolver {
 public:
  explicit LinearSolver(SpMat A) : A_(std::move(A)) {
    cg_.setTolerance(1e-12);
    cg_.setMaxIterations(std::max<int>(2000, 20 * static_cast<int>(A_.rows())));
    cg_.compute(A_);
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b, int& iterations) {
    if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd x = cg_.solve(b);
    iterations += static_cast<int>(cg_.iterations());
    if (cg_.info() != Eigen::Success || !x.allFinite())
      throw SolverError("conjugate gradients did not reach tolerance 1e-12", static_cast<int>(cg_.iterations()));
    return x;
  }

 private:
  SpMat A_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg_;
};

/// Zero-Dirichlet 5-point Poisson problem on the disk nodes strictly inside the circle.
class DirichletPoisson {
 public:
  explicit DirichletPoisson(const DiskChart& c) : c_(c), unknown_(c.size(), -1) {
    for (std::size_t k = 0; k < c.size(); ++k)
      if (strictly_inside(c, static_cast<int>(k))) unknown_[k] = count_++;
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (unknown_[k] < 0) continue;
      trip.emplace_back(unknown_[k], unknown_[k], 4.0);
      auto [i, j] = c.node[k];
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int q = c.at(i + di, j + dj);
        if (q >= 0 && unknown_[q] >= 0) trip.emplace_back(unknown_[k], unknown_[q], -1.0);
      }
    }
    SpMat A(count_, count_);
    A.setFromTriplets(trip.begin(), trip.end());
    solver_ = std::make_unique<LinearSolver>(std::move(A));
  }

  std::vector<double> solve(const std::vector<double>& f, int& iterations) {
    Eigen::VectorXd b(count_);
    for (std::size_t k = 0; k < c_.size(); ++k)
      if (unknown_[k] >= 0) b[unknown_[k]] = -c_.h * c_.h * f[k];
    Eigen::VectorXd x = solver_->solve(b, iterations);
    std::vector<double> u(c_.size(), 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k)
      if (unknown_[k] >= 0) u[k] = x[unknown_[k]];
    return u;
  }

  std::vector<Vec3> solve(const std::vector<Vec3>& f, int& iterations) {
    std::vector<Vec3> u(c_.size(), Vec3::Zero());
    for (int comp = 0; comp < 3; ++comp) {
      std::vector<double> fc(f.size());
      for (std::size_t k = 0; k < f.size(); ++k) fc[k] = f[k][comp];
      auto uc = solve(fc, iterations);
      for (std::size_t k = 0; k < u.size(); ++k) u[k][comp] = uc[k];
    }
    return u;
  }

  /// L2 norm of Delta_h u - f over the unknowns.
  template <class T>
  double residual(const std::vector<T>& u, const std::vector<T>& f) const {
    double s = 0;
    for (std::size_t k = 0; k < c_.size(); ++k)
      if (unknown_[k] >= 0) s += sq(T(laplacian(c_, u, static_cast<int>(k)) - f[k]));
    return std::sqrt(s) * c_.h;
  }

 private:
  const DiskChart& c_;
  std::vector<int> unknown_;
  int count_ = 0;
  std::unique_ptr<LinearSolver> solver_;
};

/// Least-squares inversion of grad-perp u = G over the edges joining disk
/// nodes. The normal equations are a graph Laplacian whose right side is the
/// discrete curl of G; the centre node is pinned and the mean removed after.
class PerpInversion {
 public:
  explicit PerpInversion(const DiskChart& c) : c_(c), unknown_(c.size(), -1) {
    pinned_ = c.at(c.n / 2, c.n / 2);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (static_cast<int>(k) != pinned_) unknown_[k] = count_++;
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < c.size(); ++k) {
      auto [i, j] = c.node[k];
      for (auto [di, dj] : {std::pair{1, 0}, {0, 1}}) {
        int q = c.at(i + di, j + dj);
        if (q < 0) continue;
        edges_.push_back({static_cast<int>(k), q, di == 1 ? 0 : 1});
        int a = unknown_[k], b = unknown_[q];
        if (a >= 0) trip.emplace_back(a, a, 1.0);
        if (b >= 0) trip.emplace_back(b, b, 1.0);
        if (a >= 0 && b >= 0) {
          trip.emplace_back(a, b, -1.0);
          trip.emplace_back(b, a, -1.0);
        }
      }
    }
    SpMat A(count_, count_);
    A.setFromTriplets(trip.begin(), trip.end());
    solver_ = std::make_unique<LinearSolver>(std::move(A));
  }

  /// G holds both components of the target for grad-perp u.
  std::vector<double> solve(const std::vector<std::array<double, 2>>& G, int& iterations) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(count_);
    for (const Edge& e : edges_) {
      // d1 u = G^2 along x1 edges, d2 u = -G^1 along x2 edges (midpoint values).
      double t = e.dir == 0 ? 0.5 * (G[e.p][1] + G[e.q][1]) : -0.5 * (G[e.p][0] + G[e.q][0]);
      if (unknown_[e.q] >= 0) b[unknown_[e.q]] += c_.h * t;
      if (unknown_[e.p] >= 0) b[unknown_[e.p]] -= c_.h * t;
    }
    Eigen::VectorXd x = solver_->solve(b, iterations);
    std::vector<double> u(c_.size(), 0.0);
    double mean = 0;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (unknown_[k] >= 0) u[k] = x[unknown_[k]];
      mean += u[k];
    }
    mean /= static_cast<double>(u.size());
    for (double& v : u) v -= mean;
    return u;
  }

  std::vector<Vec3> solve(const std::vector<std::array<Vec3, 2>>& G, int& iterations) {
    std::vector<Vec3> u(c_.size(), Vec3::Zero());
    std::vector<std::array<double, 2>> Gc(G.size());
    for (int comp = 0; comp < 3; ++comp) {
      for (std::size_t k = 0; k < G.size(); ++k) Gc[k] = {G[k][0][comp], G[k][1][comp]};
      auto uc = solve(Gc, iterations);
      for (std::size_t k = 0; k < u.size(); ++k) u[k][comp] = uc[k];
    }
    return u;
  }

 private:
  struct Edge {
    int p, q, dir;
  };
  const DiskChart& c_;
  std::vector<int> unknown_;
  std::vector<Edge> edges_;
  int pinned_ = -1;
  int count_ = 0;
  std::unique_ptr<LinearSolver> solver_;
};

/// Half-radius L2 norm of grad-perp u - G.
template <class T>
double relation_residual(const DiskChart& c, const std::vector<T>& u, const std::vector<std::array<T, 2>>& G) {
  double s = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!in_subdisk(c, static_cast<int>(k))) continue;
    auto g = grad(c, u, static_cast<int>(k));
    s += sq(T(-g[1] - G[k][0])) + sq(T(g[0] - G[k][1]));
  }
  return std::sqrt(s) * c.h;
}

std::vector<std::array<Vec3, 2>> r_source(const DiskChart& c, const Terms& t, const PotentialSet& pot) {
  std::vector<std::array<Vec3, 2>> G(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto dX = grad(c, pot.X, static_cast<int>(k));
    for (int i = 0; i < 2; ++i)
      G[k][i] = pot.L[k].cross(perp_of(t.dphi[k], i)) - c.hvec[k].cross(t.dphi[k][i]) - dX[i];
  }
  return G;
}

std::vector<std::array<double, 2>> s_source(const DiskChart& c, const Terms& t, const PotentialSet& pot) {
  std::vector<std::array<double, 2>> G(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto dY = grad(c, pot.Y, static_cast<int>(k));
    for (int i = 0; i < 2; ++i) G[k][i] = pot.L[k].dot(perp_of(t.dphi[k], i)) - dY[i];
  }
  return G;
}

void recover_rs(const DiskChart& c, const Terms& t, PotentialSet& pot) {
  PerpInversion inv(c);
  auto GR = r_source(c, t, pot);
  pot.R = inv.solve(GR, pot.iterations);
  pot.relation_R = relation_residual(c, pot.R, GR);
  auto GS = s_source(c, t, pot);
  pot.S = inv.solve(GS, pot.iterations);
  pot.relation_S = relation_residual(c, pot.S, GS);
}

}  // namespace

std::array<double, 2> perp_gradient(const DiskChart& chart, const std::vector<double>& f, int k) {
  auto g = grad(chart, f, k);
  return {-g[1], g[0]};
}

DiskChart build_chart(const PatchSpec& patch, int n) {
  if (n < 33) throw PreconditionError("disk chart needs n >= 33, got " + std::to_string(n));
  if (n > 1025) throw ResourceError("disk chart capped at n = 1025, got " + std::to_string(n));
  if (!(patch.scale > 0) || !std::isfinite(patch.scale) || !std::isfinite(patch.offset))
    throw DomainError("patch scale must be positive and finite");
  if (patch.kind == PatchKind::sphere_cap && !(patch.radius > 0 && std::isfinite(patch.radius)))
    throw DomainError("sphere cap radius must be positive and finite");

  DiskChart c;
  c.patch = patch;
  c.n = n;
  c.h = 2.0 / (n - 1);
  c.index.assign(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x1 = c.x(i), x2 = c.x(j);
      if (x1 * x1 + x2 * x2 > 1.0 + 1e-12) continue;
      c.index[i * n + j] = static_cast<int>(c.node.size());
      c.node.push_back({i, j});
    }
  for (const auto& [i, j] : c.node) {
    const double x1 = c.x(i), x2 = c.x(j);
    Point pt = evaluate(patch, x1, x2);
    auto d = jacobian(patch, x1, x2);
    const double e1 = d[0].squaredNorm(), e2 = d[1].squaredNorm();
    const double defect = (std::abs(e1 - e2) + 2 * std::abs(d[0].dot(d[1]))) / (e1 + e2);
    c.conformality_defect = std::max(c.conformality_defect, defect);
    const double lam = 0.5 * std::log(0.5 * (e1 + e2));
    if (!std::isfinite(lam)) throw DomainError("branch point inside the chart");
    if (d[0].cross(d[1]).dot(pt.n) <= 0) throw DomainError("patch normal disagrees with the chart orientation");
    c.phi.push_back(pt.phi);
    c.normal.push_back(pt.n);
    c.hvec.push_back(pt.hvec);
    c.H.push_back(pt.hvec.dot(pt.n));
    c.lambda.push_back(lam);
  }
  if (!(c.conformality_defect <= 1e-10))
    throw DomainError("patch is not conformal: defect " + std::to_string(c.conformality_defect));
  return c;
}

PotentialSet solve_potentials(const DiskChart& c, const EnergyParams& params) {
  params.validate();
  const Terms t = analytic_terms(c, params);
  PotentialSet pot;
  DirichletPoisson dir(c);

  std::vector<Vec3> fV(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) fV[k] = -t.W[k];
  pot.V = dir.solve(fV, pot.iterations);
  pot.poisson_residual_V = dir.residual(pot.V, fV);

  std::vector<Vec3> fX(c.size());
  std::vector<double> fY(c.size());
  std::vector<std::array<Vec3, 2>> GL(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto dV = grad(c, pot.V, static_cast<int>(k));
    fX[k] = dV[0].cross(t.dphi[k][0]) + dV[1].cross(t.dphi[k][1]);
    fY[k] = dV[0].dot(t.dphi[k][0]) + dV[1].dot(t.dphi[k][1]);
    for (int i = 0; i < 2; ++i) GL[k][i] = t.T[k][i] - dV[i];
  }
  pot.X = dir.solve(fX, pot.iterations);
  pot.poisson_residual_X = dir.residual(pot.X, fX);
  pot.Y = dir.solve(fY, pot.iterations);
  pot.poisson_residual_Y = dir.residual(pot.Y, fY);

  PerpInversion inv(c);
  pot.L = inv.solve(GL, pot.iterations);
  pot.relation_L = relation_residual(c, pot.L, GL);
  recover_rs(c, t, pot);
  return pot;
}

void recover_rs(const DiskChart& chart, const EnergyParams& params, PotentialSet& pot) {
  recover_rs(chart, analytic_terms(chart, params), pot);
}

ConservationResiduals check_conservation_residuals(const DiskChart& c, const PotentialSet& pot,
                                                   const EnergyParams& params) {
  if (pot.V.size() != c.size() || pot.R.size() != c.size() || pot.S.size() != c.size() || pot.Y.size() != c.size())
    throw PreconditionError("potentials were not solved on this chart");
  const ChartParams cp = chart_params(params);
  const Terms t = analytic_terms(c, params);
  ConservationResiduals out;
  out.n = c.n;

  // Flux of the divergence term in the R equation, needed at neighbours.
  std::vector<std::array<Vec3, 2>> Q(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    auto dY = grad(c, pot.Y, static_cast<int>(k));
    for (int i = 0; i < 2; ++i)
      Q[k][i] = c.normal[k] * dY[i] + 0.25 * cp.rho * c.phi[k].squaredNorm() * t.dphi[k][i];
  }

  std::array<double, 4> acc{};
  double scale = 0;
  for (std::size_t kk = 0; kk < c.size(); ++kk) {
    const int k = static_cast<int>(kk);
    if (!in_subdisk(c, k)) continue;
    auto [i, j] = c.node[k];
    const auto& dphi = t.dphi[k];
    const auto& dn = t.dn[k];
    auto dR = grad(c, pot.R, k);
    auto dS = grad(c, pot.S, k);
    auto dY = grad(c, pot.Y, k);
    const std::array<double, 2> perpS = {-dS[1], dS[0]};
    const std::array<Vec3, 2> perpR = {Vec3(-dR[1]), dR[0]};
    const Vec3 divQ = (Q[c.at(i + 1, j)][0] - Q[c.at(i - 1, j)][0] + Q[c.at(i, j + 1)][1] - Q[c.at(i, j - 1)][1]) /
                      (2 * c.h);

    Vec3 nS = Vec3::Zero(), nR = Vec3::Zero(), sPhi = Vec3::Zero(), rPhi = Vec3::Zero(), yPhi = Vec3::Zero();
    double nRdot = 0, grad_phi_sq = 0;
    for (int a = 0; a < 2; ++a) {
      const Vec3 pn = perp_of(dn, a);
      nS += pn * dS[a];
      nR += pn.cross(dR[a]);
      nRdot += pn.dot(dR[a]);
      sPhi += perpS[a] * dphi[a];
      rPhi += perpR[a].cross(dphi[a]);
      yPhi += dphi[a] * dY[a];
      grad_phi_sq += dphi[a].squaredNorm();
    }
    const double phi_sq = c.phi[k].squaredNorm();

    // The S and cross terms of the R equation, and the S and R terms of the
    // Phi equation, carry the signs that the analytic sphere (with an
    // arbitrary constant L) satisfies; see the unit tests.
    const Vec3 rR = laplacian(c, pot.R, k) - (-nS - nR + divQ);
    const double rS = laplacian(c, pot.S, k) - nRdot;
    const double rY = laplacian(c, pot.Y, k) - grad_phi_sq * (-(cp.c0 * cp.c0 + cp.alpha) + cp.c0 * c.H[k] -
                                                               0.5 * cp.rho * c.phi[k].dot(c.normal[k]));
    const Vec3 rP =
        t.lap_phi[k] - (sPhi + rPhi + yPhi + 0.25 * cp.rho * phi_sq * grad_phi_sq * c.normal[k]);

    acc[eq_R] += rR.squaredNorm();
    acc[eq_S] += rS * rS;
    acc[eq_Y] += rY * rY;
    acc[eq_Phi] += rP.squaredNorm();
    scale += t.lap_phi[k].squaredNorm();
  }
  for (int e = 0; e < 4; ++e) out.residual[e] = std::sqrt(acc[e]) * c.h;
  out.scale = std::sqrt(scale) * c.h;
  out.relation_L = pot.relation_L;
  return out;
}

ConservationStudy conservation_study(const PatchSpec& patch, const EnergyParams& params, int n_coarse, int n_fine) {
  if (!(n_fine > n_coarse)) throw DomainError("conservation study needs n_fine > n_coarse");
  ConservationStudy s;
  s.patch = patch;
  s.params = params;
  for (int n : {n_coarse, n_fine}) {
    DiskChart c = build_chart(patch, n);
    PotentialSet pot = solve_potentials(c, params);
    s.levels.push_back(check_conservation_residuals(c, pot, params));
  }
  const auto& a = s.levels[0];
  const auto& b = s.levels[1];
  const double hr = std::log(static_cast<double>(n_fine - 1) / (n_coarse - 1));
  auto order = [&](double rc, double rf) {
    if (rf == 0.0) return rc == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::log(rc / rf) / hr;
  };
  s.all_converged = true;
  for (int e = 0; e < 4; ++e) {
    s.order[e] = order(a.residual[e], b.residual[e]);
    s.at_floor[e] = b.residual[e] <= s.floor * b.scale;
    s.converged[e] = s.at_floor[e] || s.order[e] >= s.min_order;
    s.all_converged = s.all_converged && s.converged[e];
    s.any_stalled = s.any_stalled || (!s.at_floor[e] && s.order[e] < 0.5);
  }
  s.relation_L_order = order(a.relation_L, b.relation_L);
  return s;
}

void to_json(nlohmann::json& j, const PatchSpec& p) {
  j = {{"kind", to_string(p.kind)}, {"radius", p.radius}, {"scale", p.scale}, {"offset", p.offset}};
}

void to_json(nlohmann::json& j, const ConservationResiduals& r) {
  nlohmann::json res;
  for (int e = 0; e < 4; ++e) res[kConservationNames[e]] = r.residual[e];
  j = {{"n", r.n}, {"residuals", res}, {"scale", r.scale}, {"relation_L", r.relation_L}};
}

void to_json(nlohmann::json& j, const ConservationStudy& s) {
  nlohmann::json eqs;
  for (int e = 0; e < 4; ++e)
    eqs[kConservationNames[e]] = {{"order", s.order[e]}, {"at_floor", s.at_floor[e]}, {"converged", s.converged[e]}};
  j = {{"patch", s.patch},   {"params", s.params},       {"levels", s.levels},
       {"equations", eqs},   {"relation_L_order", s.relation_L_order},
       {"floor", s.floor},   {"min_order", s.min_order}, {"all_converged", s.all_converged},
       {"any_stalled", s.any_stalled}};
}

}  // namespace helfrich
