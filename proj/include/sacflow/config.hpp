#pragma once

#include <string>
#include <vector>

#include "sacflow/flow.hpp"
#include "sacflow/mesh.hpp"
#include "sacflow/stabilization.hpp"
#include "sacflow/transport.hpp"

namespace sacflow {

enum class Study { Stokes, Sac, Convergence };

/// Everything one batch run needs. Defaults reproduce the reference setup.
struct RunConfig {
  Study study = Study::Sac;

  SacGeometrySpec sac;
  int sac_level = 0;

  /// alveolar_sin or identity. fixed_domain keeps the geometry at the identity while the
  /// wall velocity still follows alveolar_sin.
  AleMap::Kind ale_kind = AleMap::Kind::AlveolarSin;
  double amplitude = 0.09;
  double omega = 0.4 * M_PI;
  bool fixed_domain = false;

  PhysParams phys;

  std::vector<StabKind> stab_kinds{StabKind::LpsAniso};
  IsoMode iso_mode = IsoMode::ScaledFluctuation;
  /// Non-positive means the default 1/nu (1/(60 nu) for interior penalty).
  double alpha_lps = 0.0;
  double alpha_ip = 0.0;

  BcMode bc = BcMode::Artificial;

  double t_end = 10.0;

  double stokes_stretch = 0.01;
  std::vector<int> stokes_levels{3, 4, 5, 6};

  std::vector<int> convergence_levels{0, 1, 2, 3};
  double convergence_time = 8.75;

  NewtonOptions newton;

  std::string output_dir = "output";
  /// Write a VTK snapshot every this many steps (0: none).
  int snapshot_stride = 0;

  /// Raw text the config was parsed from (hashed into the CSV metadata).
  std::string source;

  /// Stabilisation parameters for one kind given a viscosity.
  StabParams stab_params(StabKind kind, double nu) const;
};

std::string to_string(Study s);

/// Parse INI text (key = value with [section] headers). Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key with its default, as INI text.
std::string default_config_text();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);

}  // namespace sacflow
