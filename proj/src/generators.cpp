#include "helfrich/errors.hpp"
#include "helfrich/mesh.hpp"

#include <cmath>
#include <map>
#include <random>

namespace helfrich {
namespace {

double signed_volume(const TriangleMesh& m) {
  double v = 0.0;
  for (const Face& f : m.faces)
    v += m.vertices[f[0]].dot(m.vertices[f[1]].cross(m.vertices[f[2]]));
  return v / 6.0;
}

void orient_outward(TriangleMesh& m) {
  if (signed_volume(m) < 0)
    for (Face& f : m.faces) std::swap(f[1], f[2]);
}

TriangleMesh icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : m.vertices) p.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return m;
}

void subdivide_on_sphere(TriangleMesh& m) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(m.vertices.size());
    m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
    midpoint.emplace(key, id);
    return id;
  };
  std::vector<Face> faces;
  faces.reserve(m.faces.size() * 4);
  for (const Face& f : m.faces) {
    int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
    faces.push_back({f[0], ab, ca});
    faces.push_back({f[1], bc, ab});
    faces.push_back({f[2], ca, bc});
    faces.push_back({ab, bc, ca});
  }
  m.faces = std::move(faces);
}

void check_level(int level, const GeneratorLimits& limits) {
  if (level < 0) throw PreconditionError("subdivision level must be >= 0");
  if (level > limits.max_level)
    throw ResourceError("subdivision level " + std::to_string(level) + " exceeds cap " +
                        std::to_string(limits.max_level));
}

}  // namespace

TriangleMesh gen_icosphere(int level, double radius, const GeneratorLimits& limits) {
  check_level(level, limits);
  if (!(radius > 0)) throw DomainError("radius must be positive");
  TriangleMesh m = icosahedron();
  for (int l = 0; l < level; ++l) subdivide_on_sphere(m);
  if (radius != 1.0)
    for (Vec3& p : m.vertices) p *= radius;
  return m;
}

TriangleMesh gen_ellipsoid(double a, double b, double c, int level, const GeneratorLimits& limits) {
  if (!(a > 0 && b > 0 && c > 0)) throw DomainError("ellipsoid semi-axes must be positive");
  TriangleMesh m = gen_icosphere(level, 1.0, limits);
  for (Vec3& p : m.vertices) p = Vec3(a * p.x(), b * p.y(), c * p.z());
  return m;
}

TriangleMesh gen_tetrahedron() {
  TriangleMesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  orient_outward(m);
  return m;
}

TriangleMesh gen_cube(int n) {
  if (n < 1) throw PreconditionError("cube grid size must be >= 1");
  TriangleMesh m;
  std::map<std::array<int, 3>, int> ids;
  auto vid = [&](std::array<int, 3> g) {
    auto it = ids.find(g);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(-1.0 + 2.0 * g[0] / n, -1.0 + 2.0 * g[1] / n, -1.0 + 2.0 * g[2] / n);
    ids.emplace(g, id);
    return id;
  };
  for (int axis = 0; axis < 3; ++axis) {
    int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          auto at = [&](int di, int dj) {
            std::array<int, 3> g{};
            g[axis] = side * n;
            g[u] = i + di;
            g[v] = j + dj;
            return vid(g);
          };
          int p00 = at(0, 0), p10 = at(1, 0), p11 = at(1, 1), p01 = at(0, 1);
          // (u, v, axis) is right-handed, so ccw in (u, v) faces +axis.
          if (side == 1) {
            m.faces.push_back({p00, p10, p11});
            m.faces.push_back({p00, p11, p01});
          } else {
            m.faces.push_back({p00, p11, p10});
            m.faces.push_back({p00, p01, p11});
          }
        }
    }
  }
  return m;
}

TriangleMesh gen_figure_eight(int level) {
  const double R = 1.0;
  TriangleMesh m = gen_ellipsoid(4.0, 0.3, 0.3, level);
  for (Vec3& p : m.vertices) {
    double th = p.x();
    double rad = R + p.y();
    p = Vec3(rad * std::cos(th), rad * std::sin(th), p.z() + 0.02 * th);
  }
  orient_outward(m);
  return m;
}

NeckProfile neck_profile(int k) {
  if (k < 1) throw DomainError("neck parameter k must be >= 1");
  NeckProfile p;
  p.big_radius = 1.0 + 1.0 / k;
  p.small_radius = 1.0 - 1.0 / k;
  if (!(p.small_radius > 0))
    throw DegenerateGeometryError("k=1 gives a small sphere of zero radius");
  p.waist = std::min(2.0 / k, 0.5 * p.small_radius);
  const double w = p.waist;
  // A sphere of radius R centred on the axis touches r = w cosh u where cosh^2 u = R/w.
  p.u_big = -std::acosh(std::sqrt(p.big_radius / w));
  p.u_small = std::acosh(std::sqrt(p.small_radius / w));
  p.center_big = w * p.u_big + w * std::cosh(p.u_big) * std::sinh(p.u_big);
  p.center_small = w * p.u_small + w * std::cosh(p.u_small) * std::sinh(p.u_small);
  return p;
}

TriangleMesh gen_two_sphere_neck(int k, int neck_samples) {
  if (neck_samples < 8) throw PreconditionError("neck_samples must be >= 8");
  const NeckProfile p = neck_profile(k);
  const int n = neck_samples;
  const double d = 2.0 * M_PI / n;
  const double w = p.waist;

  // Meridian profile (r, z) from the south pole of the big sphere to the
  // north pole of the small one, poles excluded.
  std::vector<std::pair<double, double>> rings;
  auto steps = [&](double span) { return std::max(1, static_cast<int>(std::ceil(span / d))); };
  auto mercator = [](double th) { return std::log(std::tan(0.5 * th)); };
  auto inv_mercator = [](double s) { return 2.0 * std::atan(std::exp(s)); };

  const double r1 = w * std::cosh(p.u_big), z1 = w * p.u_big;
  const double th_big = std::atan2(r1, p.center_big - z1);
  {
    double s0 = mercator(d), s1 = mercator(th_big);
    int m = steps(s1 - s0);
    for (int i = 0; i < m; ++i) {
      double th = inv_mercator(s0 + (s1 - s0) * i / m);
      rings.emplace_back(p.big_radius * std::sin(th), p.center_big - p.big_radius * std::cos(th));
    }
  }
  {
    int m = steps(p.u_small - p.u_big);
    for (int i = 0; i <= m; ++i) {
      double u = p.u_big + (p.u_small - p.u_big) * i / m;
      rings.emplace_back(w * std::cosh(u), w * u);
    }
  }
  const double r2 = w * std::cosh(p.u_small), z2 = w * p.u_small;
  const double th_small = std::atan2(r2, z2 - p.center_small);
  {
    double s0 = mercator(d), s1 = mercator(th_small);
    int m = steps(s1 - s0);
    for (int i = m - 1; i >= 0; --i) {
      double th = inv_mercator(s0 + (s1 - s0) * i / m);
      rings.emplace_back(p.small_radius * std::sin(th), p.center_small + p.small_radius * std::cos(th));
    }
  }

  TriangleMesh m;
  const int south = 0;
  m.vertices.emplace_back(0.0, 0.0, p.center_big - p.big_radius);
  for (const auto& [r, z] : rings)
    for (int l = 0; l < n; ++l) {
      double phi = d * l;
      m.vertices.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  const int north = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, p.center_small + p.small_radius);

  auto at = [&](int ring, int l) { return 1 + ring * n + (l % n); };
  const int nr = static_cast<int>(rings.size());
  for (int l = 0; l < n; ++l) m.faces.push_back({south, at(0, l + 1), at(0, l)});
  for (int j = 0; j + 1 < nr; ++j)
    for (int l = 0; l < n; ++l) {
      m.faces.push_back({at(j, l), at(j, l + 1), at(j + 1, l + 1)});
      m.faces.push_back({at(j, l), at(j + 1, l + 1), at(j + 1, l)});
    }
  for (int l = 0; l < n; ++l) m.faces.push_back({north, at(nr - 1, l), at(nr - 1, l + 1)});
  orient_outward(m);

  const double tol = degeneracy_tolerance(m);
  for (std::size_t f = 0; f < m.faces.size(); ++f)
    if (!(face_area(m, f) >= tol))
      throw DegenerateGeometryError("neck of waist " + std::to_string(w) +
                                        " is below the triangle degeneracy tolerance",
                                    static_cast<long>(f));
  return m;
}

}  // namespace helfrich

namespace helfrich {

TriangleMesh perturbed(const TriangleMesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0 && amplitude < 1)) throw DomainError("perturbation amplitude must lie in [0, 1)");
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : mesh.vertices) c += v;
  c /= static_cast<double>(mesh.vertices.size());
  std::mt19937_64 rng(seed);
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) {
    // 53 random bits mapped to [-1, 1); avoids the library-defined distributions.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    v = c + (1.0 + amplitude * u) * (v - c);
  }
  return out;
}

}  // namespace helfrich
