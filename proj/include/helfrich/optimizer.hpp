#pragma once

#include "helfrich/energy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace helfrich {

struct ConstraintSpec {
  double A0 = 4.0 * M_PI;
  double V0 = 4.0 * M_PI / 3.0;

  bool feasible() const { return isoperimetric_feasible(A0, V0); }
  /// 36 pi V0^2 / A0^3.
  double isoperimetric_ratio() const;
  /// A0 fixed, V0 from the isoperimetric ratio.
  static ConstraintSpec from_ratio(double A0, double ratio);
};

struct BubbleCandidate {
  int peak_vertex = -1;
  std::size_t cluster_size = 0;
  double concentration = 0;   // curvature mass in the ball around the peak
  double core_diameter = 0;   // 2 sqrt(2 / |II|^2) at the peak
  double reference_diameter = 0;
  double shrink = 0;          // reference / core
  bool flagged = false;
};

struct BubblingOptions {
  double delta = 0.5;
  double ball_fraction = 0.2;  // ball radius as a fraction of the mesh diameter
  double shrink_factor = 10.0;
};

struct BubblingReport {
  double min_edge = 0, mean_edge = 0, edge_ratio = 0;
  double ball_radius = 0;
  double max_concentration = 0;
  double threshold = 0;  // 8 pi - delta
  std::vector<BubbleCandidate> candidates;
  bool flagged = false;
};

/// `reference_diameter` <= 0 selects the static comparison against the mesh diameter.
BubblingReport bubbling_diagnostics(const TriangleMesh& mesh, const BubblingOptions& opts = {},
                                    double reference_diameter = 0.0);

/// Smallest curvature length scale 2 sqrt(2 / max |II|^2) on the mesh.
double min_curvature_diameter(const TriangleMesh& mesh);

struct OptimizerOptions {
  int max_iterations = 50000;
  double gtol = 1e-6;              // relative to the initial projected gradient norm
  double ftol = 1e-10;             // relative energy decrease over the stagnation window
  int stagnation_window = 200;
  double armijo = 1e-4;
  double min_step = 1e-12;
  int maintenance_every = 25;      // 0 disables smoothing and edge flips
  double smoothing = 0.1;
  double projection_tol = 1e-9;
  int projection_max_steps = 50;
  double mu0 = 10.0;               // initial penalty for the augmented-Lagrangian path
  double mu_max = 1e8;
  int al_inner_iterations = 500;
  bool detect_bubbling = true;
  BubblingOptions bubbling;
  int checkpoint_every = 0;
  std::string checkpoint_prefix;
  std::uint64_t seed = 0;          // recorded in checkpoints; the flow itself draws no random numbers
};

struct FlowState {
  TriangleMesh mesh;
  std::string mode;    // "unconstrained", "projected" or "augmented-lagrangian"
  std::string status;  // "running", "converged", "stagnated", "max-iterations", "line-search-failed", "bubbling-suspected"
  double lambda_A = 0, lambda_V = 0;
  double mu_A = 0, mu_V = 0;
  int iteration = 0;
  int accepted = 0;
  double step = 1.0;
  double energy = 0;
  double grad_norm = 0, initial_grad_norm = 0;
  double area_violation = 0, volume_violation = 0;  // relative
  std::vector<double> energy_history;
  std::vector<double> willmore_history;
  std::vector<double> area_violation_history, volume_violation_history;
  std::vector<int> maintenance_iterations;
  std::optional<BubblingReport> bubbles;
  double initial_curvature_diameter = 0;
  // Augmented-Lagrangian bookkeeping, kept here so checkpoints resume exactly.
  int round_iteration = 0;
  double round_start_energy = 0;
  double last_round_violation = -1;
  int rounds = 0;
  std::size_t mode_start = 0;  // history index where the current mode began
  std::uint64_t seed = 0;
};

/// Moves along the gradient D of log(isoperimetric ratio) until the ratio
/// matches (1-D Newton on t), then rescales about the centroid to the target
/// area: x -> c + s (x - c + t D / max|D_i|). Meshes already within `tol`
/// are returned unchanged. Throws ProjectionFailedError.
TriangleMesh project_constraints(const TriangleMesh& mesh, const ConstraintSpec& constraints, double tol = 1e-9,
                                 int max_steps = 50);

FlowState minimize(const TriangleMesh& mesh0, const EnergyParams& params,
                   const std::optional<ConstraintSpec>& constraints, const OptimizerOptions& opts = {});

/// Continues a flow from a checkpointed state.
FlowState resume(FlowState state, const EnergyParams& params, const std::optional<ConstraintSpec>& constraints,
                 const OptimizerOptions& opts = {});

void save_checkpoint(const FlowState& state, const std::string& prefix);
FlowState load_checkpoint(const std::string& prefix);

/// One tangential Laplacian smoothing pass followed by Delaunay edge flips.
/// Returns the number of flips.
int maintain_mesh(TriangleMesh& mesh, double smoothing);

/// Prolate spheroid (a, b, b) with the requested isoperimetric ratio,
/// scaled to area A0.
TriangleMesh prolate_initializer(double ratio, double A0, int level, double* aspect = nullptr);

struct SweepRow {
  double ratio = 0, A0 = 0, V0 = 0;
  double willmore = 0, helfrich = 0, area = 0, volume = 0;
  double area_violation = 0, volume_violation = 0;
  double lambda_A = 0, lambda_V = 0;
  int iterations = 0;
  std::string status, mode, initializer;
};

struct SweepOptions {
  int level = 3;
  int workers = 1;
  double A0 = 4.0 * M_PI;
  OptimizerOptions optimizer;
};

/// Duplicate ratios are dropped; rows come back sorted by ratio.
std::vector<SweepRow> isoperimetric_sweep(const std::vector<double>& ratios, const EnergyParams& params,
                                          const SweepOptions& opts);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string energy_history_csv(const FlowState& state);

void to_json(nlohmann::json& j, const BubblingReport& r);
void to_json(nlohmann::json& j, const FlowState& s);
void to_json(nlohmann::json& j, const ConstraintSpec& c);

}  // namespace helfrich
