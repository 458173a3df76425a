#include "sacflow/studies.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace sacflow {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

void write_csv_header(std::ostream& os, const RunConfig& cfg) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.source)));
  os << "# sacflow " << kVersion << "\n";
  os << "# study = " << to_string(cfg.study) << "\n";
  os << "# config_hash = " << hash << "\n";
}

// ---- Stokes -----------------------------------------------------------------

StokesStudy run_stokes_study(const RunConfig& cfg, std::ostream* log) {
  StokesStudy study;
  study.stretch = cfg.stokes_stretch;
  for (int level : cfg.stokes_levels) {
    const QuadMesh mesh = generate_half_lens_mesh(level);
    for (StabKind kind : cfg.stab_kinds) {
      StokesRow row;
      row.kind = kind;
      row.level = level;
      row.cells = mesh.n_cells();
      row.h = mesh_size(mesh);
      try {
        const StokesResult r = solve_stokes(cfg.stokes_stretch, mesh, cfg.stab_params(kind, 1.0));
        row.j_div = r.j_div;
        row.errors = r.errors;
        row.relative_residual = r.solve.relative_residual;
      } catch (const NumericallySingular& e) {
        row.failed = true;
        row.failure = e.what();
      }
      if (log) {
        *log << "stokes a=" << cfg.stokes_stretch << " " << to_string(kind) << " cells=" << row.cells;
        if (row.failed)
          *log << " failed: " << row.failure << "\n";
        else
          *log << " J_div=" << fmt(row.j_div) << " |p-ph|=" << fmt(row.errors.p)
               << " |grad(v-vh)|=" << fmt(row.errors.grad_v) << " |v-vh|=" << fmt(row.errors.v)
               << " res=" << fmt(row.relative_residual) << "\n";
      }
      study.rows.push_back(row);
    }
  }
  for (StabKind kind : cfg.stab_kinds) {
    std::array<std::vector<double>, 4> f;
    std::vector<double> h;
    for (const auto& row : study.rows) {
      if (row.kind != kind || row.failed) continue;
      h.push_back(row.h);
      f[0].push_back(row.j_div);
      f[1].push_back(row.errors.p);
      f[2].push_back(row.errors.grad_v);
      f[3].push_back(row.errors.v);
    }
    std::array<std::optional<ConvergenceFit>, 4> fits;
    if (h.size() >= 2)
      for (int k = 0; k < 4; ++k)
        fits[k] = fit_convergence(h, f[k], ConvergenceFit::Model::Power);
    study.fits.emplace_back(kind, fits);
  }
  return study;
}

void write_stokes_csv(std::ostream& os, const StokesStudy& study, const RunConfig& cfg) {
  write_csv_header(os, cfg);
  os << "# stretch = " << fmt(study.stretch) << "\n";
  os << "stab,cells,h,J_div,p_err,grad_v_err,v_err,relative_residual\n";
  for (const auto& r : study.rows) {
    os << to_string(r.kind) << ',' << r.cells << ',' << fmt(r.h) << ',';
    if (r.failed)
      os << "-,-,-,-,-\n";
    else
      os << fmt(r.j_div) << ',' << fmt(r.errors.p) << ',' << fmt(r.errors.grad_v) << ','
         << fmt(r.errors.v) << ',' << fmt(r.relative_residual) << '\n';
  }
  for (const auto& [kind, fits] : study.fits) {
    os << to_string(kind) << ",alpha_conv,-";
    for (const auto& f : fits) os << ',' << (f ? fmt(f->alpha) : std::string("-"));
    os << ",-\n";
  }
}

// ---- Sac --------------------------------------------------------------------

AleMap geometry_map(const RunConfig& cfg) {
  if (cfg.fixed_domain || cfg.ale_kind == AleMap::Kind::Identity) return AleMap::identity();
  return AleMap::alveolar_sin(cfg.amplitude, cfg.omega);
}

AleMap wall_velocity_map(const RunConfig& cfg) {
  if (cfg.ale_kind == AleMap::Kind::Identity) return AleMap::identity();
  return AleMap::alveolar_sin(cfg.amplitude, cfg.omega);
}

SacRun run_sac_simulation(const RunConfig& cfg, const SacHooks& hooks) {
  const QuadMesh mesh = generate_alveolar_sac_mesh(cfg.sac, cfg.sac_level);
  const AleMap geo = geometry_map(cfg);
  const AleMap wall = wall_velocity_map(cfg);
  const StabParams stab = cfg.stab_params(cfg.stab_kinds.front(), cfg.phys.nu);

  FlowProblem flow(mesh, geo, cfg.phys, stab, wall);
  flow.newton() = cfg.newton;
  TransportProblem transport(mesh, geo, cfg.phys, cfg.bc);

  SacRun run;
  run.cells = mesh.n_cells();
  run.h = mesh_size(mesh);
  run.flow = FlowState::zero(mesh.n_vertices(), 0.0);
  const auto verts = mesh.vertices();
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 w = wall.evaluate(verts[v], 0.0).v_dom;
    run.flow.u[3 * v] = w.x;
    run.flow.u[3 * v + 1] = w.y;
  }
  run.conc = TransportState::constant(mesh.n_vertices(), cfg.phys.c_ext, 0.0);

  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.phys.dt));
  for (int m = 1; m <= steps; ++m) {
    const double t = m * cfg.phys.dt;
    NewtonReport nr;
    try {
      run.flow = flow.step(run.flow, t, &nr);
      run.conc = transport.step(run.conc, run.flow, t);
    } catch (const std::exception& e) {
      throw StepFailure("step " + std::to_string(m) + " (t = " + fmt(t) + "): " + e.what(), m, t);
    }
    SacSample s;
    s.t = t;
    s.j_gamma0 = j_gamma0(mesh, run.conc.c);
    s.j_omega = j_omega(mesh, geo, t, run.conc.c);
    s.j_sigma = j_sigma_blood(mesh, geo, t, run.flow.u, cfg.phys);
    s.j_vort = j_vort(mesh, geo, t, run.flow.u);
    s.p_norm = pressure_norm_sac(mesh, geo, t, run.flow.u);
    s.newton_iterations = nr.iterations;
    run.series.push_back(s);
    if (hooks.log && (m % 20 == 0 || m == steps))
      *hooks.log << "t=" << fmt(t) << " newton=" << nr.iterations << " J_Gamma0=" << fmt(s.j_gamma0)
                 << " J_Omega=" << fmt(s.j_omega) << "\n";
    if (hooks.on_step) hooks.on_step(m, mesh, geo, run.flow, run.conc);
  }
  return run;
}

void write_sac_csv(std::ostream& os, const SacRun& run, const RunConfig& cfg) {
  write_csv_header(os, cfg);
  os << "# cells = " << run.cells << ", stab = " << to_string(cfg.stab_kinds.front())
     << ", bc = " << to_string(cfg.bc) << ", duct_length = " << fmt(cfg.sac.duct_length)
     << ", fixed_domain = " << (cfg.fixed_domain ? "true" : "false") << "\n";
  os << "t,J_Gamma0,J_Omega,J_sigma_bl,J_vort,p_norm\n";
  for (const auto& s : run.series)
    os << fmt(s.t) << ',' << fmt(s.j_gamma0) << ',' << fmt(s.j_omega) << ',' << fmt(s.j_sigma)
       << ',' << fmt(s.j_vort) << ',' << fmt(s.p_norm) << '\n';
}

// ---- Convergence ------------------------------------------------------------

ConvergenceStudy run_convergence(const RunConfig& cfg, std::ostream* log) {
  if (cfg.convergence_levels.size() < 3)
    throw ConfigError("convergence.levels: at least three levels are needed");
  ConvergenceStudy study;
  study.time = cfg.convergence_time;
  for (StabKind kind : cfg.stab_kinds) {
    std::vector<double> h, vort, pn, om;
    for (int level : cfg.convergence_levels) {
      RunConfig c = cfg;
      c.stab_kinds = {kind};
      c.sac_level = level;
      c.t_end = cfg.convergence_time;
      const SacRun run = run_sac_simulation(c);
      ConvergenceRow row;
      row.kind = kind;
      row.level = level;
      row.cells = run.cells;
      row.h = run.h;
      row.j_vort = run.series.back().j_vort;
      row.p_norm = run.series.back().p_norm;
      row.j_omega = run.series.back().j_omega;
      if (log)
        *log << to_string(kind) << " cells=" << row.cells << " J_vort=" << fmt(row.j_vort)
             << " |p|=" << fmt(row.p_norm) << " J_Omega=" << fmt(row.j_omega) << "\n";
      study.rows.push_back(row);
      h.push_back(row.h);
      vort.push_back(row.j_vort);
      pn.push_back(row.p_norm);
      om.push_back(row.j_omega);
    }
    const std::size_t n = h.size();
    auto last3 = [n](const std::vector<double>& v) { return std::span<const double>(v).subspan(n - 3); };
    const auto model = ConvergenceFit::Model::OffsetPower;
    study.fits.emplace_back(kind, std::array<ConvergenceFit, 3>{
                                      fit_convergence(last3(h), last3(vort), model),
                                      fit_convergence(last3(h), last3(pn), model),
                                      fit_convergence(last3(h), last3(om), model)});
  }
  return study;
}

void write_convergence_csv(std::ostream& os, const ConvergenceStudy& study, const RunConfig& cfg) {
  write_csv_header(os, cfg);
  os << "# time = " << fmt(study.time) << "\n";
  os << "stab,cells,h,J_vort,p_norm,J_Omega\n";
  for (const auto& r : study.rows)
    os << to_string(r.kind) << ',' << r.cells << ',' << fmt(r.h) << ',' << fmt(r.j_vort) << ','
       << fmt(r.p_norm) << ',' << fmt(r.j_omega) << '\n';
  for (const auto& [kind, fits] : study.fits) {
    os << to_string(kind) << ",j_e,-";
    for (const auto& f : fits) os << ',' << fmt(f.j_e);
    os << '\n' << to_string(kind) << ",alpha_conv,-";
    for (const auto& f : fits) os << ',' << fmt(f.alpha);
    os << '\n';
  }
}

// ---- VTK --------------------------------------------------------------------

void write_vtk_solution(std::ostream& os, const QuadMesh& mesh, const AleMap& ale, double t,
                        std::span<const double> u, std::span<const double> c) {
  const std::size_t nv = mesh.n_vertices();
  os << "# vtk DataFile Version 3.0\nsacflow t=" << fmt(t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nv << " double\n";
  os.precision(10);
  for (const Vec2& p : mesh.vertices()) {
    const Vec2 x = ale.evaluate(p, t).x;
    os << x.x << ' ' << x.y << " 0\n";
  }
  os << "CELLS " << mesh.n_cells() << ' ' << 5 * mesh.n_cells() << '\n';
  for (const auto& q : mesh.cells()) os << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
  os << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (std::size_t i = 0; i < mesh.n_cells(); ++i) os << "9\n";
  os << "POINT_DATA " << nv << '\n';
  if (!u.empty()) {
    os << "VECTORS velocity double\n";
    for (std::size_t v = 0; v < nv; ++v) os << u[3 * v] << ' ' << u[3 * v + 1] << " 0\n";
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < nv; ++v) os << u[3 * v + 2] << '\n';
  }
  if (!c.empty()) {
    os << "SCALARS concentration double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < nv; ++v) os << c[v] << '\n';
  }
}

}  // namespace sacflow
