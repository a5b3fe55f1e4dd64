#pragma once

#include <cassert>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace otvm::core {

// Dense row-major n-d array. Images and feature maps use {C,H,W},
// matrices {M,N}, flat vectors {N}.
template <typename T>
struct ArrayT {
  std::vector<int> shape;
  std::vector<T> data;

  ArrayT() = default;
  explicit ArrayT(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
    data.assign((size_t)numel_of(shape), fill);
  }

  static ArrayT zeros(std::vector<int> s) { return ArrayT(std::move(s)); }
  static ArrayT full(std::vector<int> s, T v) { return ArrayT(std::move(s), v); }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("negative array dim");
      n *= d;
    }
    return n;
  }

  int64_t numel() const { return (int64_t)data.size(); }
  int ndim() const { return (int)shape.size(); }
  int dim(int i) const {
    assert(i >= 0 && i < ndim());
    return shape[(size_t)i];
  }
  bool empty() const { return data.empty(); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](int64_t i) { return data[(size_t)i]; }
  T operator[](int64_t i) const { return data[(size_t)i]; }

  // {C,H,W} access
  T& at(int c, int y, int x) {
    assert(ndim() == 3);
    return data[(size_t)((int64_t)(c * shape[1] + y) * shape[2] + x)];
  }
  T at(int c, int y, int x) const {
    assert(ndim() == 3);
    return data[(size_t)((int64_t)(c * shape[1] + y) * shape[2] + x)];
  }
  // {H,W} access
  T& at(int y, int x) {
    assert(ndim() == 2);
    return data[(size_t)((int64_t)y * shape[1] + x)];
  }
  T at(int y, int x) const {
    assert(ndim() == 2);
    return data[(size_t)((int64_t)y * shape[1] + x)];
  }

  bool same_shape(const ArrayT& o) const { return shape == o.shape; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using ArrayF = ArrayT<float>;
using ArrayD = ArrayT<double>;

template <typename To, typename From>
ArrayT<To> cast_array(const ArrayT<From>& a) {
  ArrayT<To> out(a.shape);
  for (int64_t i = 0; i < a.numel(); ++i) out[i] = (To)a[i];
  return out;
}

inline std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

template <typename T>
double max_abs_diff(const ArrayT<T>& a, const ArrayT<T>& b) {
  assert(a.same_shape(b));
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    double d = std::abs((double)a[i] - (double)b[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace otvm::core
