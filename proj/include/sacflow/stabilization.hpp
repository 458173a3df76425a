#pragma once

#include <string>

#include "sacflow/ale.hpp"
#include "sacflow/mesh.hpp"
#include "sacflow/sparse.hpp"

namespace sacflow {

enum class StabKind { LpsAniso, IpAniso, LpsIso, LpsSimple };

/// How the isotropic variants are built. AsPrinted: plain gradient products over
/// the whole domain. ScaledFluctuation: fluctuations kappa_h p with a per-patch h_P^2.
enum class IsoMode { AsPrinted, ScaledFluctuation };

struct StabParams {
  StabKind kind = StabKind::LpsAniso;
  double alpha = 1.0;
  IsoMode mode = IsoMode::ScaledFluctuation;
};

/// alpha = 1 / nu for the projection variants and 1 / (60 nu) for interior penalty.
StabParams default_stab(StabKind kind, double nu, IsoMode mode = IsoMode::ScaledFluctuation);

std::string to_string(StabKind k);
std::string to_string(IsoMode m);
StabKind parse_stab_kind(const std::string& s);
IsoMode parse_iso_mode(const std::string& s);

/// Where the pressure unknown of vertex v lives: row = stride * v + offset.
struct PressureBlock {
  int stride = 1;
  int offset = 0;
};

/// alpha sum_P sum_i (J h_i^2 d_i kappa p, d_i kappa xi)_P
void assemble_lps_aniso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                        CsrMatrix& M, PressureBlock pb = {});

/// alpha sum_e int_e J h_n^3 [d_n p][d_n xi] over interior patch edges.
void assemble_ip_aniso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                       CsrMatrix& M, PressureBlock pb = {});

/// Isotropic LPS; `simple` drops the map factors (reference gradients only).
void assemble_lps_iso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                      bool simple, IsoMode mode, CsrMatrix& M, PressureBlock pb = {});

void assemble_stabilization(const StabParams& stab, const QuadMesh& mesh, const AleMap& ale,
                            double t, CsrMatrix& M, PressureBlock pb = {});

/// Pressure-only matrix of one stabilisation (pattern with patch cliques).
CsrMatrix stabilization_matrix(const StabParams& stab, const QuadMesh& mesh, const AleMap& ale,
                               double t);

/// x^T M x
double quadratic_form(const CsrMatrix& M, std::span<const double> x);

}  // namespace sacflow
