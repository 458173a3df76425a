#include "sacflow/blas_check.hpp"

#include <cmath>
#include <random>
#include <vector>

extern "C" {
void dgemm_(const char*, const char*, const int*, const int*, const int*, const double*,
            const double*, const int*, const double*, const int*, const double*, double*,
            const int*);
void dtrsm_(const char*, const char*, const char*, const char*, const int*, const int*,
            const double*, const double*, const int*, double*, const int*);
}

namespace sacflow {

bool blas_kernels_ok() {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double one = 1.0, zero = 0.0;

  int n = 208;
  std::vector<double> A(n * n), B(n * n), C(n * n, 0.0);
  for (auto& v : A) v = u(gen);
  for (auto& v : B) v = u(gen);
  dgemm_("N", "N", &n, &n, &n, &one, A.data(), &n, B.data(), &n, &zero, C.data(), &n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += A[i + k * n] * B[k + j * n];
      if (std::abs(s - C[i + j * n]) > 1e-10) return false;
    }

  n = 40;
  std::vector<double> L(n * n, 0.0), X(n * n), R(n * n);
  for (int j = 0; j < n; ++j) {
    L[j + j * n] = 2.0 + u(gen);
    for (int i = j + 1; i < n; ++i) L[i + j * n] = u(gen) / n;
  }
  for (auto& v : R) v = u(gen);
  X = R;
  dtrsm_("L", "L", "N", "N", &n, &n, &one, L.data(), &n, X.data(), &n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k <= i; ++k) s += L[i + k * n] * X[k + j * n];
      if (std::abs(s - R[i + j * n]) > 1e-10) return false;
    }
  return true;
}

}  // namespace sacflow
