#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>

namespace helfrich::detail {

using Dual9 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 9, 1>>;

template <class T>
using V3 = Eigen::Matrix<T, 3, 1>;

inline double value_of(double x) { return x; }
inline double value_of(const Dual9& x) { return x.value(); }

/// Per-face contributions to the vertex quantities every curvature functional
/// is built from: the area gradient (cotan form), the mixed Voronoi area share
/// of each corner, and the unnormalised face normal.
template <class T>
struct FaceTerms {
  V3<T> area_grad[3];
  T mixed[3];
  V3<T> N;
};

template <class T>
FaceTerms<T> face_terms(const V3<T> (&p)[3]) {
  using std::sqrt;
  FaceTerms<T> out;
  out.N = (p[1] - p[0]).cross(p[2] - p[0]);
  const T twice_area = sqrt(out.N.squaredNorm());

  T cot[3];
  double dots[3];
  for (int c = 0; c < 3; ++c) {
    const V3<T> u = p[(c + 1) % 3] - p[c];
    const V3<T> v = p[(c + 2) % 3] - p[c];
    const T d = u.dot(v);
    dots[c] = value_of(d);
    cot[c] = d / twice_area;
  }
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    out.area_grad[c] = T(0.5) * (cot[b] * (p[c] - p[a]) + cot[a] * (p[c] - p[b]));
  }

  const T area = T(0.5) * twice_area;
  int obtuse = -1;
  for (int c = 0; c < 3; ++c)
    if (dots[c] < 0) obtuse = c;
  for (int c = 0; c < 3; ++c) {
    if (obtuse < 0) {
      const int a = (c + 1) % 3, b = (c + 2) % 3;
      out.mixed[c] = T(0.125) * ((p[c] - p[a]).squaredNorm() * cot[b] + (p[c] - p[b]).squaredNorm() * cot[a]);
    } else {
      out.mixed[c] = obtuse == c ? T(0.5) * area : T(0.25) * area;
    }
  }
  return out;
}

}  // namespace helfrich::detail
