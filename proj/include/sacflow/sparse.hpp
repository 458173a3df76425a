#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sacflow {

/// Compressed row structure with sorted column indices per row.
struct SparsityPattern {
  std::size_t n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;

  /// Build from per-row column lists (sorted and deduplicated here).
  static SparsityPattern from_rows(std::vector<std::vector<int>> rows);
  std::size_t nnz() const { return cols.size(); }
};

/// Square CSR matrix over a shared pattern. Explicit zeros are kept.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::shared_ptr<const SparsityPattern> pattern);

  std::size_t size() const { return pattern_ ? pattern_->n : 0; }
  std::size_t nnz() const { return values_.size(); }
  const SparsityPattern& pattern() const { return *pattern_; }
  std::shared_ptr<const SparsityPattern> pattern_ptr() const { return pattern_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Position of (i, j) in the value array; throws if not in the pattern.
  int find(int i, int j) const;
  void add(int i, int j, double v) { values_[find(i, j)] += v; }
  double at(int i, int j) const;
  void set_zero();
  /// Zero row i and put `diag` on the diagonal.
  void set_identity_row(int i, double diag = 1.0);

  void multiply(std::span<const double> x, std::span<double> y) const;
  double max_abs() const;
  CsrMatrix& operator+=(const CsrMatrix& other);

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<double> values_;
};

/// Matrix with a zero or near-zero pivot.
class NumericallySingular : public std::runtime_error {
 public:
  NumericallySingular(const std::string& what, double pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  double pivot() const { return pivot_; }

 private:
  double pivot_;
};

struct SolveReport {
  double relative_residual = 0.0;
  double min_pivot = 0.0;
  double max_entry = 0.0;
};

enum class LuBackend { Umfpack, EigenSparseLU };

/// Backend chosen for this process. UMFPACK unless SACFLOW_LU=eigen is set or the
/// BLAS it runs on fails a small self-check (some OpenBLAS kernels miscompute on
/// virtualised CPUs; OPENBLAS_CORETYPE selects another kernel).
LuBackend lu_backend();
std::string to_string(LuBackend b);
/// dgemm/dtrsm against naive loops; cached.
bool blas_self_check();

/// Sparse direct LU. The symbolic analysis is kept while the pattern
/// object stays the same; factor() must be called whenever values change.
class LuSolver {
 public:
  /// A pivot below threshold * max|a_ij| counts as singular.
  explicit LuSolver(double singular_threshold = 1e-14);
  ~LuSolver();
  LuSolver(const LuSolver&) = delete;
  LuSolver& operator=(const LuSolver&) = delete;

  void factor(const CsrMatrix& A);
  bool factored() const { return numeric_ != nullptr; }
  /// Solve with the current factors; the relative residual is computed against `A`.
  SolveReport solve(std::span<const double> b, std::span<double> x) const;

 private:
  void release_numeric();
  void release_symbolic();

  struct Fallback;

  double threshold_;
  LuBackend backend_;
  std::unique_ptr<Fallback> fallback_;
  const CsrMatrix* matrix_ = nullptr;
  std::shared_ptr<const SparsityPattern> symbolic_pattern_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  double min_pivot_ = 0.0;
  double max_entry_ = 0.0;
};

/// One-shot factor and solve.
std::vector<double> factor_solve(const CsrMatrix& A, std::span<const double> b,
                                 SolveReport* report = nullptr);

/// MatrixMarket coordinate real general.
void write_matrix_market(std::ostream& os, const CsrMatrix& A);

}  // namespace sacflow
