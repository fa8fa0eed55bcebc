#include "helfrich/variations.hpp"

#include "face_kernel.hpp"
#include "helfrich/errors.hpp"

#include <cmath>
#include <random>

namespace helfrich {
namespace {

using detail::Dual9;

/// Adjoint of a functional of the per-vertex sums (G_i, A_i, N_i).
struct VertexAdjoint {
  std::vector<Vec3> dG;
  std::vector<double> dA;
  std::vector<Vec3> dN;
};

/// Chains each adjoint through the exact Jacobians of the face terms.
std::vector<std::vector<Vec3>> backpropagate(const TriangleMesh& mesh, const std::vector<const VertexAdjoint*>& adj) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<std::vector<Vec3>> out(adj.size(), std::vector<Vec3>(nv, Vec3::Zero()));
  using D9 = Eigen::Matrix<double, 9, 1>;
  for (const Face& t : mesh.faces) {
    detail::V3<Dual9> p[3];
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) p[c](d) = Dual9(mesh.vertices[t[c]](d), D9::Unit(3 * c + d));
    const auto ft = detail::face_terms<Dual9>(p);
    for (std::size_t k = 0; k < adj.size(); ++k) {
      const VertexAdjoint& a = *adj[k];
      D9 acc = D9::Zero();
      Vec3 dN = Vec3::Zero();
      for (int c = 0; c < 3; ++c) {
        const int v = t[c];
        for (int d = 0; d < 3; ++d) acc += a.dG[v](d) * ft.area_grad[c](d).derivatives();
        acc += a.dA[v] * ft.mixed[c].derivatives();
        dN += a.dN[v];
      }
      for (int d = 0; d < 3; ++d) acc += dN(d) * ft.N(d).derivatives();
      for (int c = 0; c < 3; ++c) out[k][t[c]] += acc.segment<3>(3 * c);
    }
  }
  return out;
}

struct CurvatureGradients {
  std::vector<Vec3> willmore, tmc;
};

CurvatureGradients curvature_gradients(const TriangleMesh& mesh, const VertexGeometry& g) {
  const std::size_t nv = mesh.vertices.size();
  VertexAdjoint w{std::vector<Vec3>(nv), std::vector<double>(nv), std::vector<Vec3>(nv)};
  VertexAdjoint t{std::vector<Vec3>(nv), std::vector<double>(nv, 0.0), std::vector<Vec3>(nv)};
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec3& n = g.normal[i];
    const Vec3& G = g.area_grad[i];
    const double A = g.area[i];
    const double s = n.dot(G);
    const Vec3 dsdN = (G - n * s) / g.normal_sum[i].norm();
    // W_i = s^2 / (4 A), T_i = s / 2.
    w.dG[i] = (s / (2.0 * A)) * n;
    w.dA[i] = -s * s / (4.0 * A * A);
    w.dN[i] = (s / (2.0 * A)) * dsdN;
    t.dG[i] = 0.5 * n;
    t.dN[i] = 0.5 * dsdN;
  }
  auto grads = backpropagate(mesh, {&w, &t});
  return {std::move(grads[0]), std::move(grads[1])};
}

std::vector<Vec3> volume_gradient(const TriangleMesh& mesh) {
  std::vector<Vec3> g(mesh.vertices.size(), Vec3::Zero());
  for (const Face& t : mesh.faces) {
    const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    g[t[0]] += b.cross(c) / 6.0;
    g[t[1]] += c.cross(a) / 6.0;
    g[t[2]] += a.cross(b) / 6.0;
  }
  return g;
}

DiscreteGradient tagged(Functional tag, std::vector<Vec3> g) { return {tag, std::move(g)}; }

}  // namespace

Functional parse_functional(const std::string& s) {
  if (s == "area") return Functional::area;
  if (s == "volume") return Functional::volume;
  if (s == "raw_flux") return Functional::raw_flux;
  if (s == "total_mean_curvature" || s == "tmc") return Functional::total_mean_curvature;
  if (s == "willmore") return Functional::willmore;
  if (s == "helfrich" || s == "general") return Functional::helfrich;
  throw DomainError("unknown functional '" + s + "'");
}

std::string to_string(Functional f) {
  switch (f) {
    case Functional::area: return "area";
    case Functional::volume: return "volume";
    case Functional::raw_flux: return "raw_flux";
    case Functional::total_mean_curvature: return "total_mean_curvature";
    case Functional::willmore: return "willmore";
    case Functional::helfrich: return "helfrich";
  }
  return "?";
}

double DiscreteGradient::norm() const {
  double s = 0.0;
  for (const Vec3& v : g) s += v.squaredNorm();
  return std::sqrt(s);
}

Vec3 DiscreteGradient::sum() const {
  Vec3 s = Vec3::Zero();
  for (const Vec3& v : g) s += v;
  return s;
}

Vec3 DiscreteGradient::moment(const TriangleMesh& mesh) const {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) s += mesh.vertices[i].cross(g[i]);
  return s;
}

double functional_value(const TriangleMesh& mesh, Functional tag, const EnergyParams& params) {
  switch (tag) {
    case Functional::area: return total_area(mesh);
    case Functional::volume: return enclosed_volume(mesh).volume;
    case Functional::raw_flux: return enclosed_volume(mesh).raw_flux;
    default: break;
  }
  EnergyBreakdown e = energy(vertex_geometry(mesh), enclosed_volume(mesh), params);
  if (tag == Functional::total_mean_curvature) return e.cross;
  if (tag == Functional::willmore) return e.willmore;
  return e.general;
}

DiscreteGradient grad_area(const TriangleMesh& mesh) {
  return tagged(Functional::area, vertex_geometry(mesh).area_grad);
}

DiscreteGradient grad_volume(const TriangleMesh& mesh) { return tagged(Functional::volume, volume_gradient(mesh)); }

DiscreteGradient grad_raw_flux(const TriangleMesh& mesh) {
  std::vector<Vec3> g = volume_gradient(mesh);
  for (Vec3& v : g) v *= 3.0;
  return tagged(Functional::raw_flux, std::move(g));
}

DiscreteGradient grad_total_mean_curvature(const TriangleMesh& mesh) {
  return tagged(Functional::total_mean_curvature, curvature_gradients(mesh, vertex_geometry(mesh)).tmc);
}

DiscreteGradient grad_willmore(const TriangleMesh& mesh) {
  return tagged(Functional::willmore, curvature_gradients(mesh, vertex_geometry(mesh)).willmore);
}

double general_energy_and_gradient(const TriangleMesh& mesh, const EnergyParams& p, std::vector<Vec3>& grad) {
  const VertexGeometry g = vertex_geometry(mesh);
  const EnergyBreakdown e = energy(g, enclosed_volume(mesh), p);
  const CurvatureGradients cg = curvature_gradients(mesh, g);
  const std::vector<Vec3> gv = volume_gradient(mesh);
  const double area_coef = p.c0 * p.c0 + p.alpha;
  const double vol_coef = p.rho * p.volume_factor();
  grad.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] = cg.willmore[i] - 2.0 * p.c0 * cg.tmc[i] + area_coef * g.area_grad[i] + vol_coef * gv[i];
  return e.general;
}

DiscreteGradient grad_helfrich(const TriangleMesh& mesh, const EnergyParams& params) {
  DiscreteGradient d{Functional::helfrich, {}};
  general_energy_and_gradient(mesh, params, d.g);
  return d;
}

DiscreteGradient functional_gradient(const TriangleMesh& mesh, Functional tag, const EnergyParams& params) {
  switch (tag) {
    case Functional::area: return grad_area(mesh);
    case Functional::volume: return grad_volume(mesh);
    case Functional::raw_flux: return grad_raw_flux(mesh);
    case Functional::total_mean_curvature: return grad_total_mean_curvature(mesh);
    case Functional::willmore: return grad_willmore(mesh);
    case Functional::helfrich: return grad_helfrich(mesh, params);
  }
  throw DomainError("unknown functional");
}

GradCheckReport fd_gradient_check(const TriangleMesh& mesh, Functional tag, const EnergyParams& params, int trials,
                                  std::uint64_t seed) {
  if (trials < 1) throw PreconditionError("trials must be >= 1");
  GradCheckReport r;
  r.tag = tag;
  r.trials = trials;
  r.seed = seed;
  r.h = 1e-6 * bounding_box_diagonal(mesh);
  const DiscreteGradient grad = functional_gradient(mesh, tag, params);
  const std::size_t nv = mesh.vertices.size();
  const double floor = grad.norm() / std::sqrt(static_cast<double>(nv));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TriangleMesh moved = mesh;
  for (int k = 0; k < trials; ++k) {
    std::vector<Vec3> w(nv);
    double len = 0.0;
    for (Vec3& v : w) {
      v = Vec3(normal(rng), normal(rng), normal(rng));
      len += v.squaredNorm();
    }
    len = std::sqrt(len);
    double analytic = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      w[i] /= len;
      analytic += grad.g[i].dot(w[i]);
    }
    for (std::size_t i = 0; i < nv; ++i) moved.vertices[i] = mesh.vertices[i] + r.h * w[i];
    double ep = functional_value(moved, tag, params);
    for (std::size_t i = 0; i < nv; ++i) moved.vertices[i] = mesh.vertices[i] - r.h * w[i];
    double em = functional_value(moved, tag, params);
    double fd = (ep - em) / (2.0 * r.h);
    double denom = std::max({std::abs(analytic), std::abs(fd), floor});
    double err = denom > 0 ? std::abs(analytic - fd) / denom : 0.0;
    r.rel_errors.push_back(err);
    r.max_rel_error = std::max(r.max_rel_error, err);
  }
  return r;
}

IdentityReport divergence_identity_check(const TriangleMesh& mesh, const std::vector<Vec3>& X, double tol) {
  if (X.size() != mesh.vertices.size()) throw PreconditionError("field length must equal vertex count");
  for (const Vec3& v : X)
    if (!v.allFinite()) throw PreconditionError("field must be finite");
  const VertexGeometry g = vertex_geometry(mesh);
  double lhs = 0.0, scale = 0.0;
  for (const Face& t : mesh.faces) {
    const Vec3 x[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const Vec3 N = (x[1] - x[0]).cross(x[2] - x[0]);
    const Vec3 nf = N.normalized();
    // A_f grad(lambda_c) = n x (opposite edge) / 2.
    for (int c = 0; c < 3; ++c) {
      const Vec3 w = 0.5 * nf.cross(x[(c + 2) % 3] - x[(c + 1) % 3]);
      lhs += X[t[c]].dot(w);
      scale += X[t[c]].norm() * w.norm();
    }
  }
  double rhs = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) rhs += 2.0 * g.area[i] * X[i].dot(g.hvec[i]);
  IdentityReport r = make_identity("divergence_identity", lhs, rhs, tol, scale);
  r.extra["scale"] = scale;
  return r;
}

IdentityReport first_variation_tmc_check(const TriangleMesh& mesh, const std::vector<double>& phi, double tol) {
  if (phi.size() != mesh.vertices.size()) throw PreconditionError("phi length must equal vertex count");
  const VertexGeometry g = vertex_geometry(mesh);
  const DiscreteGradient gt = grad_total_mean_curvature(mesh);
  const std::vector<double> ii = second_fundamental_density(g);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    lhs += gt.g[i].dot(phi[i] * g.normal[i]);
    rhs += g.area[i] * phi[i] * (2.0 * g.H[i] * g.H[i] - 0.5 * ii[i]);
  }
  return make_identity("first_variation_total_mean_curvature", lhs, rhs, tol, 0.0);
}

void to_json(nlohmann::json& j, const GradCheckReport& r) {
  j = {{"functional", to_string(r.tag)}, {"trials", r.trials}, {"h", r.h}, {"seed", r.seed},
       {"max_rel_error", r.max_rel_error}, {"rel_errors", r.rel_errors}};
}

}  // namespace helfrich
