#include "otvm/gemm.hpp"

#include <Eigen/Core>

namespace otvm::core {

namespace {
template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using CMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
}  // namespace

template <typename T>
void gemm_nn(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate) {
  CMatMap<T> a(A, m, k);
  CMatMap<T> b(B, k, n);
  MatMap<T> c(C, m, n);
  if (accumulate)
    c.noalias() += a * b;
  else
    c.noalias() = a * b;
}

template <typename T>
void gemm_nt(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate) {
  CMatMap<T> a(A, m, k);
  CMatMap<T> b(B, n, k);
  MatMap<T> c(C, m, n);
  if (accumulate)
    c.noalias() += a * b.transpose();
  else
    c.noalias() = a * b.transpose();
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* A, const T* B, T* C, bool accumulate) {
  CMatMap<T> a(A, k, m);
  CMatMap<T> b(B, k, n);
  MatMap<T> c(C, m, n);
  if (accumulate)
    c.noalias() += a.transpose() * b;
  else
    c.noalias() = a.transpose() * b;
}

template void gemm_nn<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_nt<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_tn<float>(int, int, int, const float*, const float*, float*, bool);
template void gemm_nn<double>(int, int, int, const double*, const double*, double*, bool);
template void gemm_nt<double>(int, int, int, const double*, const double*, double*, bool);
template void gemm_tn<double>(int, int, int, const double*, const double*, double*, bool);

}  // namespace otvm::core
