#include "helfrich/errors.hpp"
#include "helfrich/geometry.hpp"
#include "helfrich/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace helfrich {

namespace {

double core_diameter(double density) { return density > 0 ? 2.0 * std::sqrt(2.0 / density) : 0.0; }

}  // namespace

double min_curvature_diameter(const TriangleMesh& mesh) {
  const VertexGeometry g = vertex_geometry(mesh);
  const std::vector<double> ii = second_fundamental_density(g);
  return core_diameter(*std::max_element(ii.begin(), ii.end()));
}

BubblingReport bubbling_diagnostics(const TriangleMesh& mesh, const BubblingOptions& opts, double reference_diameter) {
  if (!(opts.delta >= 0) || !(opts.ball_fraction > 0) || !(opts.shrink_factor >= 1))
    throw DomainError("bubbling options: delta >= 0, ball_fraction > 0, shrink_factor >= 1");
  BubblingReport r;
  const std::size_t nv = mesh.vertices.size();
  const VertexGeometry g = vertex_geometry(mesh);
  const std::vector<double> ii = second_fundamental_density(g);

  const auto edges = unique_edges(mesh);
  r.min_edge = std::numeric_limits<double>::infinity();
  for (const auto& e : edges) {
    double len = (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    r.min_edge = std::min(r.min_edge, len);
    r.mean_edge += len;
  }
  r.mean_edge /= static_cast<double>(edges.size());
  r.edge_ratio = r.min_edge / r.mean_edge;

  const double diam = diameter(mesh);
  r.ball_radius = opts.ball_fraction * diam;
  r.threshold = 8.0 * M_PI - opts.delta;
  const double ref = reference_diameter > 0 ? reference_diameter : diam;

  std::vector<double> mass(nv);
  for (std::size_t i = 0; i < nv; ++i) mass[i] = g.area[i] * ii[i];

  // Nothing can be flagged unless some vertex is curved tightly enough.
  const double peak = *std::max_element(ii.begin(), ii.end());
  const bool possible = ref / core_diameter(peak) >= opts.shrink_factor;

  std::vector<double> conc(nv, 0.0);
  const double r2 = r.ball_radius * r.ball_radius;
  for (std::size_t i = 0; i < nv; ++i) {
    // The full sweep is only needed when a flag is reachable; otherwise the
    // reported maximum is taken over the densest vertex's ball.
    if (!possible && ii[i] != peak) continue;
    double c = 0.0;
    for (std::size_t j = 0; j < nv; ++j)
      if ((mesh.vertices[j] - mesh.vertices[i]).squaredNorm() < r2) c += mass[j];
    conc[i] = c;
    r.max_concentration = std::max(r.max_concentration, c);
  }
  if (!possible) return r;

  const auto nb = vertex_neighbors(mesh);
  std::vector<int> label(nv, -1);
  for (std::size_t s = 0; s < nv; ++s) {
    if (label[s] >= 0 || conc[s] <= r.threshold) continue;
    BubbleCandidate cand;
    std::vector<int> stack{static_cast<int>(s)};
    label[s] = static_cast<int>(r.candidates.size());
    double best = -1.0;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      ++cand.cluster_size;
      cand.concentration = std::max(cand.concentration, conc[v]);
      if (ii[v] > best) {
        best = ii[v];
        cand.peak_vertex = v;
      }
      for (int w : nb[v])
        if (label[w] < 0 && conc[w] > r.threshold) {
          label[w] = label[s];
          stack.push_back(w);
        }
    }
    cand.core_diameter = core_diameter(best);
    cand.reference_diameter = ref;
    cand.shrink = cand.core_diameter > 0 ? ref / cand.core_diameter : 0.0;
    cand.flagged = cand.shrink >= opts.shrink_factor;
    r.flagged = r.flagged || cand.flagged;
    r.candidates.push_back(cand);
  }
  return r;
}

void to_json(nlohmann::json& j, const BubblingReport& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.candidates)
    cands.push_back({{"peak_vertex", c.peak_vertex},
                     {"cluster_size", c.cluster_size},
                     {"concentration", c.concentration},
                     {"core_diameter", c.core_diameter},
                     {"reference_diameter", c.reference_diameter},
                     {"shrink", c.shrink},
                     {"flagged", c.flagged}});
  j = {{"min_edge", r.min_edge},   {"mean_edge", r.mean_edge},
       {"edge_ratio", r.edge_ratio}, {"ball_radius", r.ball_radius},
       {"max_concentration", r.max_concentration}, {"threshold", r.threshold},
       {"candidates", cands},      {"flagged", r.flagged}};
}

}  // namespace helfrich
