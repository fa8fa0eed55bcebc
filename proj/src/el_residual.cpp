#include "helfrich/errors.hpp"
#include "helfrich/variations.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace helfrich {
namespace {

/// Height function w = f(u, v) over the tangent plane at a vertex, stored as
/// a polynomial in (u/scale, v/scale) of total degree <= degree.
struct Jet {
  Vec3 origin, e1, e2, n0;
  double scale = 1;
  int degree = 6;
  std::vector<std::array<int, 2>> powers;
  Eigen::VectorXd coef;

  // f and its derivatives up to second order at (u, v).
  void eval(double u, double v, double (&d)[6]) const {
    const double U = u / scale, V = v / scale;
    for (double& x : d) x = 0.0;
    // pu[k + 2] = U^k, with zero entries for negative k.
    double pu[10] = {0, 0, 1}, pv[10] = {0, 0, 1};
    for (int k = 1; k <= degree; ++k) {
      pu[k + 2] = pu[k + 1] * U;
      pv[k + 2] = pv[k + 1] * V;
    }
    for (std::size_t m = 0; m < powers.size(); ++m) {
      const int a = powers[m][0], b = powers[m][1];
      const double c = coef(m);
      d[0] += c * pu[a + 2] * pv[b + 2];
      d[1] += c * a * pu[a + 1] * pv[b + 2];
      d[2] += c * b * pu[a + 2] * pv[b + 1];
      d[3] += c * a * (a - 1) * pu[a] * pv[b + 2];
      d[4] += c * a * b * pu[a + 1] * pv[b + 1];
      d[5] += c * b * (b - 1) * pu[a + 2] * pv[b];
    }
    d[1] /= scale;
    d[2] /= scale;
    d[3] /= scale * scale;
    d[4] /= scale * scale;
    d[5] /= scale * scale;
  }
};

struct ChartPoint {
  Vec3 x, xu, xv, n, hvec;
  double H = 0, sqrtg = 0;
  Eigen::Matrix2d ginv;
};

ChartPoint chart_point(const Jet& j, double u, double v) {
  double d[6];
  j.eval(u, v, d);
  ChartPoint p;
  p.x = j.origin + u * j.e1 + v * j.e2 + d[0] * j.n0;
  p.xu = j.e1 + d[1] * j.n0;
  p.xv = j.e2 + d[2] * j.n0;
  const Vec3 N = p.xu.cross(p.xv);
  p.sqrtg = N.norm();
  p.n = N / p.sqrtg;
  const double E = p.xu.dot(p.xu), F = p.xu.dot(p.xv), G = p.xv.dot(p.xv);
  const double nn = j.n0.dot(p.n);
  const double L = d[3] * nn, M = d[4] * nn, Nn = d[5] * nn;
  const double det = E * G - F * F;
  // Outward normal: the unit sphere has H = +1.
  p.H = -(E * Nn - 2.0 * F * M + G * L) / (2.0 * det);
  p.hvec = p.H * p.n;
  p.ginv << G / det, -F / det, -F / det, E / det;
  return p;
}

Jet fit_jet(const TriangleMesh& mesh, const VertexGeometry& g, const std::vector<std::vector<int>>& nb, int i) {
  Jet j;
  j.origin = mesh.vertices[i];
  j.n0 = g.normal[i];
  const Vec3 helper = std::abs(j.n0.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  j.e1 = j.n0.cross(helper).normalized();
  j.e2 = j.n0.cross(j.e1);

  std::vector<Vec3> local;
  for (int v : k_ring(nb, i, 4)) {
    if (g.normal[v].dot(j.n0) < 0.3) continue;
    const Vec3 d = mesh.vertices[v] - j.origin;
    local.emplace_back(d.dot(j.e1), d.dot(j.e2), d.dot(j.n0));
  }
  j.degree = local.size() >= 40 ? 6 : local.size() >= 20 ? 4 : 2;
  if (local.size() < 6) throw PreconditionError("mesh too coarse for a local jet fit at vertex " + std::to_string(i));
  for (int t = 0; t <= j.degree; ++t)
    for (int a = t; a >= 0; --a) j.powers.push_back({a, t - a});

  j.scale = 0.0;
  for (const Vec3& p : local) j.scale = std::max(j.scale, std::hypot(p.x(), p.y()));
  Eigen::MatrixXd A(local.size(), j.powers.size());
  Eigen::VectorXd b(local.size());
  for (std::size_t r = 0; r < local.size(); ++r) {
    const double U = local[r].x() / j.scale, V = local[r].y() / j.scale;
    for (std::size_t m = 0; m < j.powers.size(); ++m)
      A(r, m) = std::pow(U, j.powers[m][0]) * std::pow(V, j.powers[m][1]);
    b(r) = local[r].z();
  }
  j.coef = A.colPivHouseholderQr().solve(b);
  return j;
}

/// Pointwise residual density at the chart origin.
Vec3 jet_density(const Jet& j, const EnergyParams& p) {
  const double c0 = p.c0;
  const double kappa_rho = p.volume_factor() * p.rho;
  const double h = 1e-3 * j.scale;

  // Conormal flux sqrt(g) g^{ab} sum_F c_F d_b F at (u, v), for a = 0, 1.
  auto flux = [&](double u, double v, int a) {
    const ChartPoint c = chart_point(j, u, v);
    const ChartPoint up = chart_point(j, u + h, v), um = chart_point(j, u - h, v);
    const ChartPoint vp = chart_point(j, u, v + h), vm = chart_point(j, u, v - h);
    const double cn = 1.5 * c.H - c0;
    const double cx = 2.0 * c0 * c.H - c0 * c0 - p.alpha;
    Vec3 db[2];
    db[0] = (-(up.hvec - um.hvec) + cn * (up.n - um.n) + cx * (up.x - um.x)) / (2.0 * h);
    db[1] = (-(vp.hvec - vm.hvec) + cn * (vp.n - vm.n) + cx * (vp.x - vm.x)) / (2.0 * h);
    return Vec3(c.sqrtg * (c.ginv(a, 0) * db[0] + c.ginv(a, 1) * db[1]));
  };

  const ChartPoint o = chart_point(j, 0, 0);
  Vec3 div = (flux(h, 0, 0) - flux(-h, 0, 0)) / (2.0 * h) + (flux(0, h, 1) - flux(0, -h, 1)) / (2.0 * h);

  const ChartPoint up = chart_point(j, h, 0), um = chart_point(j, -h, 0);
  const ChartPoint vp = chart_point(j, 0, h), vm = chart_point(j, 0, -h);
  const Vec3 hu = (up.hvec - um.hvec) / (2.0 * h), hv = (vp.hvec - vm.hvec) / (2.0 * h);
  const Vec3 nu = (up.n - um.n) / (2.0 * h), nv = (vp.n - vm.n) / (2.0 * h);
  const Vec3 cross = 0.5 * (hu.cross(nv) - hv.cross(nu));

  return (div + cross) / o.sqrtg + kappa_rho * o.n;
}

std::vector<Vec3> jet_residual(const TriangleMesh& mesh, const VertexGeometry& g, const EnergyParams& p) {
  const auto nb = vertex_neighbors(mesh);
  std::vector<Vec3> r(mesh.vertices.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = g.area[i] * jet_density(fit_jet(mesh, g, nb, static_cast<int>(i)), p);
  return r;
}

std::vector<Vec3> dual_cell_residual(const TriangleMesh& mesh, const VertexGeometry& g, const EnergyParams& p) {
  const double c0 = p.c0;
  const double kappa_rho = p.volume_factor() * p.rho;
  std::vector<Vec3> out(mesh.vertices.size(), Vec3::Zero());

  for (const Face& t : mesh.faces) {
    const Vec3 x[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const Vec3 N = (x[1] - x[0]).cross(x[2] - x[0]);
    const double twice_area = N.norm();
    const Vec3 nf = N / twice_area;
    Vec3 grad_basis[3];
    for (int c = 0; c < 3; ++c) grad_basis[c] = nf.cross(x[(c + 2) % 3] - x[(c + 1) % 3]) / twice_area;

    // Directional derivative of a piecewise-linear vertex field along d.
    auto D = [&](const std::vector<Vec3>& field, const Vec3& d) {
      Vec3 s = Vec3::Zero();
      for (int c = 0; c < 3; ++c) s += field[t[c]] * grad_basis[c].dot(d);
      return s;
    };
    auto lerp_s = [&](const std::vector<double>& f, const double (&w)[3]) {
      return w[0] * f[t[0]] + w[1] * f[t[1]] + w[2] * f[t[2]];
    };
    auto lerp_v = [&](const std::vector<Vec3>& f, const double (&w)[3]) {
      return Vec3(w[0] * f[t[0]] + w[1] * f[t[1]] + w[2] * f[t[2]]);
    };
    const Vec3 centroid = (x[0] + x[1] + x[2]) / 3.0;

    for (int c = 0; c < 3; ++c) {
      const int a = (c + 1) % 3, b = (c + 2) % 3;
      // Boundary of the dual cell inside this face, ccw around corner c:
      // midpoint (c,a) -> centroid -> midpoint (c,b).
      struct Segment {
        Vec3 start, end;
        double w[3];
      } segs[2];
      segs[0].start = 0.5 * (x[c] + x[a]);
      segs[0].end = centroid;
      segs[1].start = centroid;
      segs[1].end = 0.5 * (x[c] + x[b]);
      segs[0].w[c] = segs[1].w[c] = 5.0 / 12.0;
      segs[0].w[a] = 5.0 / 12.0;
      segs[0].w[b] = 1.0 / 6.0;
      segs[1].w[b] = 5.0 / 12.0;
      segs[1].w[a] = 1.0 / 6.0;

      Vec3 acc = Vec3::Zero();
      for (const auto& s : segs) {
        const Vec3 delta = s.end - s.start;
        const Vec3 conormal = delta.cross(nf);
        const double H = lerp_s(g.H, s.w);
        const Vec3 hvec = lerp_v(g.hvec, s.w);
        const Vec3 phi = lerp_v(mesh.vertices, s.w);
        acc += -D(g.hvec, conormal) + (1.5 * H - c0) * D(g.normal, conormal) +
               (2.0 * c0 * H - c0 * c0 - p.alpha) * D(mesh.vertices, conormal);
        acc += 0.5 * hvec.cross(D(g.normal, delta)) + 0.5 * kappa_rho * phi.cross(D(mesh.vertices, delta));
      }
      out[t[c]] += acc;
    }
  }
  return out;
}

}  // namespace

ELMethod parse_el_method(const std::string& s) {
  if (s == "jet") return ELMethod::jet;
  if (s == "dual_cell" || s == "dual-cell") return ELMethod::dual_cell;
  throw DomainError("EL method must be 'jet' or 'dual_cell', got '" + s + "'");
}

std::string to_string(ELMethod m) { return m == ELMethod::jet ? "jet" : "dual_cell"; }

ELResidual el_residual(const TriangleMesh& mesh, const EnergyParams& params, ELMethod method) {
  params.validate();
  const VertexGeometry g = vertex_geometry(mesh);
  ELResidual out;
  out.method = method;
  out.r = method == ELMethod::jet ? jet_residual(mesh, g, params) : dual_cell_residual(mesh, g, params);
  out.density.resize(out.r.size());
  double l2 = 0.0;
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    out.density[i] = out.r[i].norm() / g.area[i];
    l2 += g.area[i] * out.density[i] * out.density[i];
  }
  out.l2 = std::sqrt(l2);
  return out;
}

}  // namespace helfrich
