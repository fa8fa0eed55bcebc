#include "helfrich/geometry.hpp"

#include <Eigen/Geometry>
#include <unsupported/Eigen/BVH>

#include <numeric>

namespace helfrich {
namespace {

using Box = Eigen::AlignedBox<double, 3>;

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 dir = q - p, e1 = b - a, e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) <= 1e-15 * dir.norm() * e1.norm() * e2.norm()) return false;  // parallel or coplanar
  const double inv = 1.0 / det;
  const Vec3 s = p - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = inv * dir.dot(qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = inv * e2.dot(qv);
  return t >= 0.0 && t <= 1.0;
}

bool triangles_intersect(const TriangleMesh& m, const Face& f, const Face& g) {
  auto edges_hit = [&](const Face& s, const Face& t) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &c = m.vertices[t[2]];
    for (int k = 0; k < 3; ++k)
      if (segment_hits_triangle(m.vertices[s[k]], m.vertices[s[(k + 1) % 3]], a, b, c)) return true;
    return false;
  };
  return edges_hit(f, g) || edges_hit(g, f);
}

bool share_vertex(const Face& f, const Face& g) {
  for (int a : f)
    for (int b : g)
      if (a == b) return true;
  return false;
}

struct FaceQuery {
  const TriangleMesh& mesh;
  const std::vector<Box>& boxes;
  int self;
  IntersectionReport& report;

  bool intersectVolume(const Box& vol) const { return vol.intersects(boxes[self]); }
  bool intersectObject(int other) {
    if (other <= self || !boxes[other].intersects(boxes[self])) return false;
    const Face &f = mesh.faces[self], &g = mesh.faces[other];
    if (share_vertex(f, g) || !triangles_intersect(mesh, f, g)) return false;
    if (report.count == 0) {
      report.face_a = self;
      report.face_b = other;
    }
    ++report.count;
    return false;
  }
};

}  // namespace

IntersectionReport self_intersection_check(const TriangleMesh& mesh) {
  IntersectionReport report;
  const int nf = static_cast<int>(mesh.faces.size());
  if (nf == 0) return report;
  std::vector<Box> boxes(nf);
  for (int f = 0; f < nf; ++f) {
    Box b(mesh.vertices[mesh.faces[f][0]]);
    b.extend(mesh.vertices[mesh.faces[f][1]]);
    b.extend(mesh.vertices[mesh.faces[f][2]]);
    boxes[f] = b;
  }
  std::vector<int> ids(nf);
  std::iota(ids.begin(), ids.end(), 0);
  Eigen::KdBVH<double, 3, int> tree(ids.begin(), ids.end(), boxes.begin(), boxes.end());
  for (int f = 0; f < nf; ++f) {
    FaceQuery q{mesh, boxes, f, report};
    Eigen::BVIntersect(tree, q);
  }
  return report;
}

void to_json(nlohmann::json& j, const IntersectionReport& r) {
  j = {{"count", r.count}, {"witness", {r.face_a, r.face_b}}, {"embedded", r.embedded()}};
}

}  // namespace helfrich
