#include "helfrich/cli.hpp"

#include "helfrich/conservation.hpp"
#include "helfrich/errors.hpp"
#include "helfrich/optimizer.hpp"
#include "helfrich/report.hpp"
#include "helfrich/variations.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace helfrich {

namespace {

using nlohmann::json;

struct Common {
  double c0 = 0, alpha = 0, rho = 0;
  std::string convention = "flux";
  std::string report;

  EnergyParams params() const {
    EnergyParams p{c0, alpha, rho, parse_volume_convention(convention)};
    p.validate();
    return p;
  }
};

void add_energy_flags(CLI::App* app, Common& c) {
  app->add_option("--c0", c.c0, "spontaneous curvature");
  app->add_option("--alpha", c.alpha, "tensile stress (>= 0)");
  app->add_option("--rho", c.rho, "osmotic pressure (>= 0)");
  app->add_option("--convention", c.convention, "pressure term: flux or geometric");
}

void add_report_flag(CLI::App* app, Common& c) {
  app->add_option("--report", c.report, "write the JSON report here instead of stdout");
}

/// Every option of the subcommand with its resolved value.
json resolved_config(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* o : app->get_options()) {
    const std::string name = o->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (o->count() > 0) {
      const auto& r = o->results();
      j[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      j[name] = o->get_default_str();
    }
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw PreconditionError("cannot write " + path);
  f << text;
}

struct Context {
  std::ostream& out;
  const CLI::App* sub = nullptr;
  const Common* common = nullptr;

  void emit(const std::string& command, const json& result, bool pass) const {
    json j = {{"schema", kReportSchema}, {"version", kVersion}, {"command", command},
              {"config", resolved_config(sub)}, {"pass", pass}, {"result", result}};
    const std::string text = j.dump(2) + "\n";
    if (common->report.empty())
      out << text;
    else
      write_text(common->report, text);
  }
};

json topology_json(const TopologyReport& t) {
  return {{"V", t.V},
          {"E", t.E},
          {"F", t.F},
          {"chi", t.chi},
          {"boundary_edges", t.boundary_edges},
          {"nonmanifold_edges", t.nonmanifold_edges},
          {"inconsistent_edges", t.inconsistent_edges},
          {"isolated_vertices", t.isolated_vertices},
          {"degenerate_faces", t.degenerate_faces},
          {"min_face_area", t.min_face_area},
          {"closed", t.closed},
          {"orientable", t.orientable},
          {"pass", t.pass}};
}

// gen ------------------------------------------------------------------------

struct GenArgs {
  std::string kind = "icosphere";
  int level = 3;
  double radius = 1.0;
  std::vector<double> axes{1.5, 1.0, 0.8};
  int k = 4;
  int neck_samples = 64;
  int n = 8;
  double perturb = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_gen(const Context& ctx, const GenArgs& a) {
  TriangleMesh m;
  if (a.kind == "icosphere")
    m = gen_icosphere(a.level, a.radius);
  else if (a.kind == "ellipsoid") {
    if (a.axes.size() != 3) throw DomainError("--axes needs three values");
    m = gen_ellipsoid(a.axes[0], a.axes[1], a.axes[2], a.level);
  } else if (a.kind == "tetrahedron")
    m = gen_tetrahedron();
  else if (a.kind == "cube")
    m = gen_cube(a.n);
  else if (a.kind == "figure_eight")
    m = gen_figure_eight(a.level);
  else if (a.kind == "two_sphere_neck")
    m = gen_two_sphere_neck(a.k, a.neck_samples);
  else
    throw DomainError("unknown mesh kind '" + a.kind + "'");
  if (a.perturb > 0) m = perturbed(m, a.perturb, a.seed);
  save_mesh(m, a.output);
  TopologyReport t = validate_topology(m);
  ctx.emit("gen", {{"output", a.output}, {"topology", topology_json(t)}}, true);
  return 0;
}

// energy ---------------------------------------------------------------------

int cmd_energy(const Context& ctx, const std::string& path) {
  TriangleMesh m = load_mesh(path);
  require_valid(m);
  const EnergyParams p = ctx.common->params();
  EnergyBreakdown e = energy(m, p);
  VertexGeometry g = vertex_geometry(m);
  json r = {{"mesh", path},
            {"params", p},
            {"energy", e},
            {"willmore_over_4pi", e.willmore / (4 * M_PI)},
            {"gauss_bonnet_sum", gauss_bonnet_sum(g)},
            {"diameter", diameter(m)},
            {"vertices", m.num_vertices()},
            {"faces", m.num_faces()}};
  ctx.emit("energy", r, true);
  return 0;
}

// verify ---------------------------------------------------------------------

int cmd_verify(const Context& ctx, const std::string& path, int trials, std::uint64_t seed) {
  const TriangleMesh m = load_mesh(path);
  const EnergyParams p = ctx.common->params();
  json checks = json::array();
  bool pass = true;
  auto add = [&](const std::string& name, bool ok, json detail) {
    checks.push_back({{"name", name}, {"pass", ok}, {"detail", std::move(detail)}});
    pass = pass && ok;
  };

  TopologyReport t = validate_topology(m);
  add("topology", t.pass, topology_json(t));
  if (!t.pass) {
    ctx.emit("verify", {{"mesh", path}, {"checks", checks}}, false);
    return 1;
  }
  VertexGeometry g = vertex_geometry(m);
  const double gb = gauss_bonnet_sum(g);
  const double target = 2 * M_PI * static_cast<double>(t.chi);
  add("gauss_bonnet", std::abs(gb - target) <= 1e-8, {{"sum", gb}, {"target", target}, {"tol", 1e-8}});

  InequalityReport d = check_diameter_bound(m);
  add(d.name, d.pass, d);
  IdentityReport ii = second_fundamental_identity(m);
  add(ii.name, ii.pass, ii);
  IdentityReport div = divergence_identity_check(m, m.vertices);
  add(div.name, div.pass, div);
  InequalityReport wh = check_willmore_helfrich_bound(m, p.c0, total_area(m));
  add(wh.name, wh.pass, wh);
  if (t.chi == 2) {
    const double delta = willmore_mesh_deficit(m);
    InequalityReport lb = check_willmore_lower_bound(m, delta);
    json jl = lb;
    jl["delta_mesh"] = delta;
    add(lb.name, lb.pass, jl);
  }
  EmbeddednessReport ly = check_li_yau_embeddedness(m);
  add("li_yau_consistency", ly.consistent, ly);
  for (Functional f : {Functional::area, Functional::volume, Functional::total_mean_curvature, Functional::willmore,
                       Functional::helfrich}) {
    GradCheckReport gc = fd_gradient_check(m, f, p, trials, seed);
    // A screen, looser than the acceptance bound: near-critical meshes have
    // tiny Willmore gradients, so difference round-off inflates the ratio.
    add("gradient_" + to_string(f), gc.max_rel_error <= 1e-4, gc);
  }
  ctx.emit("verify", {{"mesh", path}, {"checks", checks}}, pass);
  return pass ? 0 : 1;
}

// minimize -------------------------------------------------------------------

struct MinimizeArgs {
  std::string mesh;
  std::string output;
  std::string history;
  std::string resume;
  double A0 = 0, V0 = 0, ratio = 0;
  double perturb = 0;
  OptimizerOptions opt;
};

std::optional<ConstraintSpec> constraints_from(double A0, double V0, double ratio) {
  if (ratio > 0) {
    if (!(A0 > 0)) throw DomainError("--ratio needs --A0");
    return ConstraintSpec::from_ratio(A0, ratio);
  }
  if (A0 > 0 || V0 > 0) {
    if (!(A0 > 0 && V0 > 0)) throw DomainError("--A0 and --V0 go together");
    return ConstraintSpec{A0, V0};
  }
  return std::nullopt;
}

int cmd_minimize(const Context& ctx, const MinimizeArgs& a) {
  const EnergyParams p = ctx.common->params();
  const auto cons = constraints_from(a.A0, a.V0, a.ratio);
  FlowState st;
  if (!a.resume.empty()) {
    st = resume(load_checkpoint(a.resume), p, cons, a.opt);
  } else {
    if (a.mesh.empty()) throw DomainError("minimize needs a mesh or --resume");
    TriangleMesh m = load_mesh(a.mesh);
    if (a.perturb > 0) m = perturbed(m, a.perturb, a.opt.seed);
    st = minimize(m, p, cons, a.opt);
  }
  if (!a.output.empty()) save_mesh(st.mesh, a.output);
  if (!a.history.empty()) write_text(a.history, energy_history_csv(st));
  json r = {{"params", p}, {"state", st}, {"energy", energy(st.mesh, p)},
            {"embeddedness", check_li_yau_embeddedness(st.mesh)}};
  if (cons) r["constraints"] = *cons;
  const bool ok = st.status != "line-search-failed";
  ctx.emit("minimize", r, ok);
  return ok ? 0 : 2;
}

// sweep ----------------------------------------------------------------------

int cmd_sweep(const Context& ctx, const std::vector<double>& ratios, const SweepOptions& so, const std::string& csv) {
  const EnergyParams p = ctx.common->params();
  auto rows = isoperimetric_sweep(ratios, p, so);
  const std::string text = sweep_csv(rows);
  if (!csv.empty()) write_text(csv, text);
  json jr = json::array();
  for (const SweepRow& r : rows)
    jr.push_back({{"ratio", r.ratio}, {"A0", r.A0}, {"V0", r.V0}, {"willmore", r.willmore},
                  {"helfrich", r.helfrich}, {"area", r.area}, {"volume", r.volume},
                  {"area_violation", r.area_violation}, {"volume_violation", r.volume_violation},
                  {"lambda_A", r.lambda_A}, {"lambda_V", r.lambda_V}, {"iterations", r.iterations},
                  {"status", r.status}, {"mode", r.mode}, {"initializer", r.initializer}});
  ctx.emit("sweep", {{"params", p}, {"rows", jr}}, true);
  return 0;
}

// conservation ---------------------------------------------------------------

struct ConservationArgs {
  std::string patch = "sphere_cap";
  double radius = 0;
  double radius_factor = 1.0;
  double scale = 0.5;
  double offset = 0;
  int n_coarse = 65, n_fine = 129;
};

int cmd_conservation(const Context& ctx, const ConservationArgs& a) {
  const EnergyParams p = ctx.common->params();
  PatchSpec ps;
  ps.kind = parse_patch_kind(a.patch);
  ps.scale = a.scale;
  ps.offset = a.offset;
  if (ps.kind == PatchKind::sphere_cap) ps.radius = (a.radius > 0 ? a.radius : sphere_critical_radius(p)) * a.radius_factor;
  ConservationStudy s = conservation_study(ps, p, a.n_coarse, a.n_fine);
  ctx.emit("conservation", s, true);
  return 0;
}

// bubbles --------------------------------------------------------------------

int cmd_bubbles(const Context& ctx, int kmin, int kmax, int samples, const std::string& csv) {
  if (kmin < 2 || kmax < kmin) throw DomainError("need 2 <= kmin <= kmax");
  const EnergyParams p = ctx.common->params();
  std::ostringstream table;
  table << "k,helfrich,willmore,area,volume,area_target,volume_target,bubbling_flagged\n";
  json rows = json::array();
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity(), first = 0, last = 0;
  char buf[512];
  for (int k = kmin; k <= kmax; ++k) {
    TriangleMesh m = gen_two_sphere_neck(k, samples);
    EnergyBreakdown e = energy(m, p);
    const double r1 = 1 + 1.0 / k, r2 = 1 - 1.0 / k;
    const double At = 4 * M_PI * (r1 * r1 + r2 * r2);
    const double Vt = 4 * M_PI / 3 * (r1 * r1 * r1 + r2 * r2 * r2);
    BubblingReport b = bubbling_diagnostics(m);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", k, e.helfrich, e.willmore, e.area,
                  e.volume, At, Vt, b.flagged ? 1 : 0);
    table << buf;
    rows.push_back({{"k", k}, {"energy", e}, {"area_target", At}, {"volume_target", Vt}, {"bubbling", b}});
    decreasing = decreasing && e.helfrich < prev;
    prev = e.helfrich;
    if (k == kmin) first = e.helfrich;
    last = e.helfrich;
  }
  if (!csv.empty()) write_text(csv, table.str());
  json r = {{"params", p}, {"rows", rows}, {"helfrich_strictly_decreasing", decreasing},
            {"last_over_first", first != 0 ? last / first : 0.0}};
  ctx.emit("bubbles", r, decreasing);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Canham-Helfrich energies, constrained minimisation and verification on triangle meshes", "helfrich"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "INI file with one [section] per subcommand; flags take precedence");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  std::function<int(const Context&)> action;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a catalog mesh");
  g->add_option("--kind", gen.kind, "icosphere, ellipsoid, tetrahedron, cube, figure_eight, two_sphere_neck");
  g->add_option("--level", gen.level, "subdivision level");
  g->add_option("--radius", gen.radius, "icosphere radius");
  g->add_option("--axes", gen.axes, "ellipsoid semi-axes a,b,c")->delimiter(',')->expected(3);
  g->add_option("--k", gen.k, "neck family index");
  g->add_option("--neck-samples", gen.neck_samples, "azimuthal segments of the neck mesh");
  g->add_option("--n", gen.n, "cube face subdivisions");
  g->add_option("--perturb", gen.perturb, "radial perturbation amplitude");
  g->add_option("--seed", gen.seed, "perturbation seed");
  g->add_option("-o,--output", gen.output, "output mesh (.obj or .ply)")->required();
  add_report_flag(g, common);
  g->callback([&] { action = [&](const Context& c) { return cmd_gen(c, gen); }; });

  std::string mesh_path;
  auto* en = app.add_subcommand("energy", "energy breakdown of a mesh");
  en->add_option("mesh", mesh_path, "input mesh")->required();
  add_energy_flags(en, common);
  add_report_flag(en, common);
  en->callback([&] { action = [&](const Context& c) { return cmd_energy(c, mesh_path); }; });

  int trials = 10;
  std::uint64_t verify_seed = 12345;
  auto* ve = app.add_subcommand("verify", "run the invariant suite on a mesh (read-only)");
  ve->add_option("mesh", mesh_path, "input mesh")->required();
  ve->add_option("--trials", trials, "random directions per gradient check");
  ve->add_option("--seed", verify_seed, "gradient-check seed");
  add_energy_flags(ve, common);
  add_report_flag(ve, common);
  ve->callback([&] { action = [&](const Context& c) { return cmd_verify(c, mesh_path, trials, verify_seed); }; });

  MinimizeArgs mn;
  auto* mi = app.add_subcommand("minimize", "gradient flow with optional area/volume constraints");
  mi->add_option("mesh", mn.mesh, "initial mesh");
  mi->add_option("--resume", mn.resume, "checkpoint prefix to continue from");
  mi->add_option("-o,--output", mn.output, "final mesh");
  mi->add_option("--history", mn.history, "energy-history CSV");
  mi->add_option("--A0", mn.A0, "target area");
  mi->add_option("--V0", mn.V0, "target volume");
  mi->add_option("--ratio", mn.ratio, "isoperimetric ratio 36 pi V0^2 / A0^3 (with --A0)");
  mi->add_option("--perturb", mn.perturb, "radial perturbation of the initial mesh");
  mi->add_option("--seed", mn.opt.seed, "perturbation seed");
  mi->add_option("--max-iterations", mn.opt.max_iterations);
  mi->add_option("--gtol", mn.opt.gtol);
  mi->add_option("--ftol", mn.opt.ftol);
  mi->add_option("--stagnation-window", mn.opt.stagnation_window);
  mi->add_option("--maintenance-every", mn.opt.maintenance_every);
  mi->add_option("--smoothing", mn.opt.smoothing);
  mi->add_option("--projection-tol", mn.opt.projection_tol);
  mi->add_option("--al-inner-iterations", mn.opt.al_inner_iterations);
  mi->add_option("--detect-bubbling", mn.opt.detect_bubbling);
  mi->add_option("--checkpoint-every", mn.opt.checkpoint_every);
  mi->add_option("--checkpoint-prefix", mn.opt.checkpoint_prefix);
  add_energy_flags(mi, common);
  add_report_flag(mi, common);
  mi->callback([&] { action = [&](const Context& c) { return cmd_minimize(c, mn); }; });

  std::vector<double> ratios{0.7, 0.85, 1.0};
  SweepOptions so;
  std::string sweep_csv_path;
  auto* sw = app.add_subcommand("sweep", "constrained minima over isoperimetric ratios");
  sw->add_option("--ratios", ratios, "comma-separated ratios in (0, 1]")->delimiter(',');
  sw->add_option("--level", so.level, "initializer subdivision level");
  sw->add_option("--workers", so.workers, "worker threads");
  sw->add_option("--A0", so.A0, "target area");
  sw->add_option("--max-iterations", so.optimizer.max_iterations);
  sw->add_option("--csv", sweep_csv_path, "CSV table");
  add_energy_flags(sw, common);
  add_report_flag(sw, common);
  sw->callback([&] { action = [&](const Context& c) { return cmd_sweep(c, ratios, so, sweep_csv_path); }; });

  ConservationArgs ca;
  auto* co = app.add_subcommand("conservation", "conservation-law residuals on an analytic disk chart");
  co->add_option("--patch", ca.patch, "sphere_cap, catenoid or plane");
  co->add_option("--radius", ca.radius, "sphere radius; 0 selects the critical radius");
  co->add_option("--radius-factor", ca.radius_factor, "multiplies the sphere radius (1.1 for the control)");
  co->add_option("--scale", ca.scale, "chart scale");
  co->add_option("--offset", ca.offset, "catenoid axial offset");
  co->add_option("--n-coarse", ca.n_coarse);
  co->add_option("--n-fine", ca.n_fine);
  add_energy_flags(co, common);
  add_report_flag(co, common);
  co->callback([&] { action = [&](const Context& c) { return cmd_conservation(c, ca); }; });

  int kmin = 2, kmax = 12, samples = 64;
  std::string bub_csv;
  auto* bu = app.add_subcommand("bubbles", "energies along the two-sphere neck family");
  bu->add_option("--kmin", kmin);
  bu->add_option("--kmax", kmax);
  bu->add_option("--neck-samples", samples);
  bu->add_option("--csv", bub_csv, "CSV of k, helfrich, willmore, area, volume");
  add_energy_flags(bu, common);
  add_report_flag(bu, common);
  bu->callback([&] { action = [&](const Context& c) { return cmd_bubbles(c, kmin, kmax, samples, bub_csv); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  Context ctx{out, sub, &common};
  try {
    return action(ctx);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace helfrich
