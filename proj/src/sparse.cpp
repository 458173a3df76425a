#include "sacflow/sparse.hpp"

#include "sacflow/blas_check.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <ostream>

namespace sacflow {

SparsityPattern SparsityPattern::from_rows(std::vector<std::vector<int>> rows) {
  SparsityPattern p;
  p.n = rows.size();
  p.row_ptr.assign(p.n + 1, 0);
  for (std::size_t i = 0; i < p.n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    p.row_ptr[i + 1] = p.row_ptr[i] + static_cast<int>(r.size());
  }
  p.cols.reserve(p.row_ptr.back());
  for (auto& r : rows) p.cols.insert(p.cols.end(), r.begin(), r.end());
  return p;
}

CsrMatrix::CsrMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), values_(pattern_->nnz(), 0.0) {}

int CsrMatrix::find(int i, int j) const {
  const auto& p = *pattern_;
  const auto first = p.cols.begin() + p.row_ptr[i];
  const auto last = p.cols.begin() + p.row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j)
    throw std::out_of_range("CsrMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") not in pattern");
  return static_cast<int>(it - p.cols.begin());
}

double CsrMatrix::at(int i, int j) const {
  const auto& p = *pattern_;
  const auto first = p.cols.begin() + p.row_ptr[i];
  const auto last = p.cols.begin() + p.row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[it - p.cols.begin()];
}

void CsrMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void CsrMatrix::set_identity_row(int i, double diag) {
  const auto& p = *pattern_;
  for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) values_[k] = p.cols[k] == i ? diag : 0.0;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const auto& p = *pattern_;
  for (std::size_t i = 0; i < p.n; ++i) {
    double s = 0.0;
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += values_[k] * x[p.cols[k]];
    y[i] = s;
  }
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CsrMatrix& CsrMatrix::operator+=(const CsrMatrix& other) {
  if (other.pattern_ == pattern_) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
  }
  const auto& p = *other.pattern_;
  for (std::size_t i = 0; i < p.n; ++i)
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      if (other.values_[k] != 0.0) add(static_cast<int>(i), p.cols[k], other.values_[k]);
  return *this;
}

namespace {

LuBackend choose_backend() {
  if (const char* env = std::getenv("SACFLOW_LU")) {
    const std::string v(env);
    if (v == "eigen") return LuBackend::EigenSparseLU;
    if (v == "umfpack") return LuBackend::Umfpack;
  }
  if (blas_self_check()) return LuBackend::Umfpack;
  std::cerr << "sacflow: BLAS self-check failed, using Eigen SparseLU "
               "(set OPENBLAS_CORETYPE, e.g. Haswell, to get UMFPACK back)\n";
  return LuBackend::EigenSparseLU;
}

using EigenCsc = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Exposes the diagonal of U, which SparseLU stores inside its supernodal L.
class PivotLu : public Eigen::SparseLU<EigenCsc, Eigen::COLAMDOrdering<int>> {
 public:
  double min_abs_pivot() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cols(); ++j) {
      bool found = false;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it)
        if (it.index() == j) {
          m = std::min(m, std::abs(it.value()));
          found = true;
          break;
        }
      if (!found) return 0.0;
    }
    return m;
  }
};

}  // namespace

bool blas_self_check() {
  static const bool ok = blas_kernels_ok();
  return ok;
}

LuBackend lu_backend() {
  static const LuBackend b = choose_backend();
  return b;
}

std::string to_string(LuBackend b) {
  return b == LuBackend::Umfpack ? "umfpack" : "eigen_sparselu";
}

struct LuSolver::Fallback {
  PivotLu lu;
  EigenCsc scaled;
  std::vector<double> row_scale;
  bool analysed = false;
};

LuSolver::LuSolver(double singular_threshold)
    : threshold_(singular_threshold), backend_(lu_backend()) {}

LuSolver::~LuSolver() {
  release_numeric();
  release_symbolic();
}

void LuSolver::release_numeric() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
  numeric_ = nullptr;
  matrix_ = nullptr;
}

void LuSolver::release_symbolic() {
  if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
  symbolic_ = nullptr;
  symbolic_pattern_.reset();
  if (fallback_) fallback_->analysed = false;
}

void LuSolver::factor(const CsrMatrix& A) {
  release_numeric();
  const auto& p = A.pattern();
  const int n = static_cast<int>(p.n);
  max_entry_ = A.max_abs();

  if (backend_ == LuBackend::EigenSparseLU) {
    if (!fallback_) fallback_ = std::make_unique<Fallback>();
    auto& f = *fallback_;
    // rows scaled to unit max so the threshold compares like UMFPACK's scaled pivots
    f.row_scale.assign(n, 1.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(p.nnz());
    for (int i = 0; i < n; ++i) {
      double m = 0.0;
      for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) m = std::max(m, std::abs(A.values()[k]));
      if (m > 0.0) f.row_scale[i] = 1.0 / m;
      for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
        trip.emplace_back(i, p.cols[k], A.values()[k] * f.row_scale[i]);
    }
    f.scaled.resize(n, n);
    f.scaled.setFromTriplets(trip.begin(), trip.end());
    if (symbolic_pattern_ != A.pattern_ptr() || !f.analysed) {
      f.lu.analyzePattern(f.scaled);
      symbolic_pattern_ = A.pattern_ptr();
      f.analysed = true;
    }
    f.lu.factorize(f.scaled);
    min_pivot_ = f.lu.info() == Eigen::Success ? f.lu.min_abs_pivot() : 0.0;
    if (min_pivot_ < threshold_)
      throw NumericallySingular("matrix is numerically singular (smallest scaled pivot " +
                                    std::to_string(min_pivot_) + ")",
                                min_pivot_);
    matrix_ = &A;
    return;
  }

  // The CSR arrays of A are the CSC arrays of A^T; solves use UMFPACK_At.
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  if (symbolic_pattern_ != A.pattern_ptr()) {
    release_symbolic();
    const int status = umfpack_di_symbolic(n, n, p.row_ptr.data(), p.cols.data(),
                                           A.values().data(), &symbolic_, control, info);
    if (status != UMFPACK_OK)
      throw std::runtime_error("UMFPACK symbolic analysis failed, status " + std::to_string(status));
    symbolic_pattern_ = A.pattern_ptr();
  }
  const int status = umfpack_di_numeric(p.row_ptr.data(), p.cols.data(), A.values().data(),
                                        symbolic_, &numeric_, control, info);
  min_pivot_ = info[UMFPACK_UMIN];
  // With the default row scaling all scaled entries are at most 1 in magnitude,
  // so the threshold applies to the scaled pivots directly.
  if (status == UMFPACK_WARNING_singular_matrix || min_pivot_ < threshold_) {
    release_numeric();
    throw NumericallySingular("matrix is numerically singular (smallest scaled pivot " +
                                  std::to_string(min_pivot_) + ")",
                              status == UMFPACK_WARNING_singular_matrix ? 0.0 : min_pivot_);
  }
  if (status != UMFPACK_OK) {
    release_numeric();
    throw std::runtime_error("UMFPACK numeric factorisation failed, status " +
                             std::to_string(status));
  }
  matrix_ = &A;
}

SolveReport LuSolver::solve(std::span<const double> b, std::span<double> x) const {
  if (!matrix_) throw std::logic_error("LuSolver::solve before factor");
  const std::size_t n = b.size();

  if (backend_ == LuBackend::EigenSparseLU) {
    const auto& f = *fallback_;
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = b[i] * f.row_scale[i];
    Eigen::VectorXd sol = f.lu.solve(rhs);
    // one step of iterative refinement
    Eigen::VectorXd res = rhs - f.scaled * sol;
    sol += f.lu.solve(res);
    for (std::size_t i = 0; i < n; ++i) x[i] = sol[i];
  } else {
    const auto& p = matrix_->pattern();
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    control[UMFPACK_IRSTEP] = 2;
    const int status = umfpack_di_solve(UMFPACK_At, p.row_ptr.data(), p.cols.data(),
                                        matrix_->values().data(), x.data(), b.data(), numeric_,
                                        control, info);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
      throw std::runtime_error("UMFPACK solve failed, status " + std::to_string(status));
  }

  std::vector<double> r(n);
  matrix_->multiply(x, r);
  double rn = 0.0, bn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rn += (r[i] - b[i]) * (r[i] - b[i]);
    bn += b[i] * b[i];
  }
  SolveReport rep;
  rep.relative_residual = bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
  rep.min_pivot = min_pivot_;
  rep.max_entry = max_entry_;
  return rep;
}

std::vector<double> factor_solve(const CsrMatrix& A, std::span<const double> b,
                                 SolveReport* report) {
  LuSolver lu;
  lu.factor(A);
  std::vector<double> x(b.size(), 0.0);
  const SolveReport rep = lu.solve(b, x);
  if (report) *report = rep;
  return x;
}

void write_matrix_market(std::ostream& os, const CsrMatrix& A) {
  const auto& p = A.pattern();
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << p.n << ' ' << p.n << ' ' << p.nnz() << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < p.n; ++i)
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      os << i + 1 << ' ' << p.cols[k] + 1 << ' ' << A.values()[k] << '\n';
}

}  // namespace sacflow
