#pragma once

namespace sacflow {

/// Compares dgemm and dtrsm from the linked BLAS against naive loops on random
/// data, at sizes that reach the blocked kernels.
bool blas_kernels_ok();

}  // namespace sacflow
