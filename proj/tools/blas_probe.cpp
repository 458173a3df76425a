// Exit status 0 iff the linked BLAS passes the kernel check. Used at configure time.
#include "sacflow/blas_check.hpp"

int main() { return sacflow::blas_kernels_ok() ? 0 : 1; }
