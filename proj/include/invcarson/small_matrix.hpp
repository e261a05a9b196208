#pragma once

#include <array>
#include <cassert>
#include <cstddef>

namespace invcarson {

// Lines carry at most four conductors (a, b, c, n), so every matrix in the
// forward chain fits in a fixed 4x4 buffer with a runtime dimension.
inline constexpr int kMaxConductors = 4;

template <class T>
struct SmallMatrix {
  int n = 0;
  std::array<T, kMaxConductors * kMaxConductors> a{};

  SmallMatrix() = default;
  explicit SmallMatrix(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxConductors); }

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i * kMaxConductors + j)]; }
  const T& operator()(int i, int j) const {
    return a[static_cast<std::size_t>(i * kMaxConductors + j)];
  }
};

// Complex value stored as an explicit real/imaginary pair so the same code
// runs over double and over AD scalars.
template <class T>
struct Cplx {
  T re{};
  T im{};
};

template <class T>
Cplx<T> operator+(const Cplx<T>& a, const Cplx<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <class T>
Cplx<T> operator-(const Cplx<T>& a, const Cplx<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <class T>
Cplx<T> operator*(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T>
Cplx<T> operator/(const Cplx<T>& a, const Cplx<T>& b) {
  T den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

// Complex matrix as a pair of real matrices.
template <class T>
struct CMatrix {
  SmallMatrix<T> re;
  SmallMatrix<T> im;

  CMatrix() = default;
  explicit CMatrix(int dim) : re(dim), im(dim) {}

  int dim() const { return re.n; }
  Cplx<T> at(int i, int j) const { return {re(i, j), im(i, j)}; }
  void set(int i, int j, const Cplx<T>& z) {
    re(i, j) = z.re;
    im(i, j) = z.im;
  }
};

} // namespace invcarson
