// Batch driver: Stokes benchmark, alveolar sac simulation, sac convergence study.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sacflow/analysis.hpp"
#include "sacflow/config.hpp"
#include "sacflow/studies.hpp"

namespace fs = std::filesystem;
using namespace sacflow;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

int run_study(const std::string& config_path, const std::string& output_override, bool quiet) {
  RunConfig cfg = load_config(config_path);
  if (!output_override.empty()) cfg.output_dir = output_override;
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  std::ostream* log = quiet ? nullptr : &std::cerr;

  switch (cfg.study) {
    case Study::Stokes: {
      const StokesStudy study = run_stokes_study(cfg, log);
      auto os = open_output(out / "stokes.csv");
      write_stokes_csv(os, study, cfg);
      break;
    }
    case Study::Sac: {
      FlowState last_flow;
      TransportState last_c;
      const QuadMesh* last_mesh = nullptr;
      AleMap last_map = AleMap::identity();
      SacHooks hooks;
      hooks.log = log;
      hooks.on_step = [&](int m, const QuadMesh& mesh, const AleMap& ale, const FlowState& f,
                          const TransportState& c) {
        last_flow = f;
        last_c = c;
        last_mesh = &mesh;
        last_map = ale;
        if (cfg.snapshot_stride > 0 && m % cfg.snapshot_stride == 0) {
          char name[32];
          std::snprintf(name, sizeof name, "sac_%05d.vtk", m);
          auto os = open_output(out / name);
          write_vtk_solution(os, mesh, ale, f.t, f.u, c.c);
        }
      };
      try {
        const SacRun run = run_sac_simulation(cfg, hooks);
        auto os = open_output(out / "sac.csv");
        write_sac_csv(os, run, cfg);
      } catch (const StepFailure& e) {
        std::cerr << "solver failure at " << e.what() << "\n";
        if (last_mesh) {
          auto os = open_output(out / "failure_state.vtk");
          write_vtk_solution(os, *last_mesh, last_map, last_flow.t, last_flow.u, last_c.c);
          std::cerr << "last good state written to " << (out / "failure_state.vtk").string() << "\n";
        }
        return kSolverError;
      }
      break;
    }
    case Study::Convergence: {
      const ConvergenceStudy study = run_convergence(cfg, log);
      auto os = open_output(out / "convergence.csv");
      write_convergence_csv(os, study, cfg);
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sacflow: ALE flow and CO2 transport in a moving alveolar sac"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run the study named in a config file");
  run->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output_dir, "output directory (overrides output.directory)");
  run->add_flag("-q,--quiet", quiet, "no progress log");

  std::string geometry = "sac", mesh_out = "mesh.vtk";
  int level = 0;
  double duct_length = 0.6;
  auto* mesh = app.add_subcommand("mesh", "write a reference mesh as VTK");
  mesh->add_option("--geometry", geometry, "sac or half_lens")
      ->check(CLI::IsMember({"sac", "half_lens"}));
  mesh->add_option("--level", level, "refinement level");
  mesh->add_option("--duct-length", duct_length, "duct length in mm (sac)");
  mesh->add_option("-o,--output", mesh_out, "output file");

  app.add_subcommand("defaults", "print the default config");
  app.add_subcommand("diagnostics", "Reynolds and Peclet numbers for the reference ranges");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_study(config_path, output_dir, quiet);
    if (*mesh) {
      QuadMesh m = geometry == "sac"
                       ? generate_alveolar_sac_mesh([&] {
                           SacGeometrySpec s;
                           s.duct_length = duct_length;
                           return s;
                         }(), level)
                       : generate_half_lens_mesh(std::max(level, 1));
      std::ofstream os(mesh_out);
      write_vtk_mesh(os, m);
      std::cout << m.n_cells() << " cells, " << m.n_vertices() << " vertices -> " << mesh_out << "\n";
      return 0;
    }
    if (app.got_subcommand("defaults")) {
      std::cout << default_config_text();
      return 0;
    }
    if (app.got_subcommand("diagnostics")) {
      const PhysParams p;
      const double V = 1e-2;
      std::printf("Re = V r / nu: [%.2g, %.2g]\n", reynolds(V, 0.055, p.nu), reynolds(V, 0.1125, p.nu));
      std::printf("Pe = V r / D:  [%.2g, %.2g]\n", peclet(V, 0.055, p.D), peclet(V, 0.1125, p.D));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const MeshError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const NumericallySingular& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const NewtonFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  }
  return 0;
}
