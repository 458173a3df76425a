#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sacflow/ale.hpp"
#include "sacflow/fem.hpp"
#include "sacflow/flow.hpp"
#include "sacflow/mesh.hpp"
#include "sacflow/sparse.hpp"

namespace sacflow {

/// Boundary treatment of c on the io edges.
/// ClassicalNitsche: weak Dirichlet c = c_ext where v.n < 0, Neumann elsewhere.
/// Artificial: d_t c + D d_n c + [-v.n]_+ (c - c_ext) = 0 on all io edges.
enum class BcMode { ClassicalNitsche, Artificial };

std::string to_string(BcMode m);
BcMode parse_bc_mode(const std::string& s);

struct TransportState {
  std::vector<double> c;
  double t = 0.0;

  static TransportState constant(std::size_t n_vertices, double value, double t = 0.0);
};

struct TransportReport {
  SolveReport solve;
  /// Nodal values outside [0, 1] by more than 1e-6.
  std::size_t out_of_range = 0;
};

/// Backward Euler ALE convection-diffusion; c = c_bl on blood edges.
class TransportProblem {
 public:
  TransportProblem(const QuadMesh& mesh, AleMap ale, PhysParams params, BcMode mode);

  const DofLayout& layout() const { return layout_; }

  /// Checks that the map is the identity on every io edge.
  void check_io_fixed(double t) const;

  /// Boundary part of the system (io edge terms only) for the given velocity.
  void assemble_boundary(std::span<const double> u, std::span<const double> c_old, double t,
                         CsrMatrix& A, std::span<double> rhs) const;

  /// Full system before Dirichlet rows.
  void assemble(std::span<const double> u, std::span<const double> c_old, double t, CsrMatrix& A,
                std::span<double> rhs) const;

  CsrMatrix make_matrix() const { return CsrMatrix(pattern_); }

  TransportState step(const TransportState& prev, const FlowState& flow, double t_new,
                      TransportReport* report = nullptr);

 private:
  const QuadMesh& mesh_;
  AleMap ale_;
  PhysParams params_;
  BcMode mode_;
  DofLayout layout_;
  std::shared_ptr<const SparsityPattern> pattern_;
  CsrMatrix matrix_;
  LuSolver lu_;
};

TransportState transport_step(const TransportState& prev, const FlowState& flow, double t_new,
                              const QuadMesh& mesh, const AleMap& ale, const PhysParams& params,
                              BcMode mode, TransportReport* report = nullptr);

}  // namespace sacflow
