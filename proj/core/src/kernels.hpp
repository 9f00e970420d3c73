#pragma once

#include <cstddef>

// Row-major dense kernels. All of them accumulate into `c`, which must not
// overlap the inputs.
namespace tmm::kernels {

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) noexcept;

// c[m x n] += a[m x k] * b[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);

// c[m x n] += a[k x m]^T * b[k x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);

// out[cols x rows] = in[rows x cols]^T
void transpose(const double* in, double* out, std::size_t rows, std::size_t cols) noexcept;

}  // namespace tmm::kernels
