#pragma once

namespace otvm::core {

// C[m,n] += A[m,k] * B[k,n], all row-major contiguous. When accumulate is
// false C is overwritten.
template <typename T>
void gemm_nn(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate);

// C[m,n] += A[m,k] * B[n,k]^T
template <typename T>
void gemm_nt(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate);

// C[m,n] += A[k,m]^T * B[k,n]
template <typename T>
void gemm_tn(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate);

}  // namespace otvm::core
