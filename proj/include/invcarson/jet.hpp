#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet carries a value, its gradient and its (packed, symmetric) Hessian with
// respect to up to N seed variables. The forward chain is written once as a
// template over the scalar type and instantiated with double for plain
// evaluation and with Jet for the optimizer's first and second derivatives.

#include <array>
#include <cmath>
#include <cstddef>

namespace invcarson {

template <int N>
struct Jet {
  static constexpr int kDim = N;
  static constexpr int kPacked = N * (N + 1) / 2;

  double v = 0.0;
  std::array<double, N> g{};
  std::array<double, kPacked> h{};

  Jet() = default;
  Jet(double value) : v(value) {} // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int index) {
    Jet j(value);
    j.g[static_cast<std::size_t>(index)] = 1.0;
    return j;
  }

  static constexpr int packed_index(int i, int j) {
    if (i < j) {
      const int t = i;
      i = j;
      j = t;
    }
    return i * (i + 1) / 2 + j;
  }

  double hess(int i, int j) const { return h[static_cast<std::size_t>(packed_index(i, j))]; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) g[i] += o.g[i];
    for (int k = 0; k < kPacked; ++k) h[k] += o.h[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) g[i] -= o.g[i];
    for (int k = 0; k < kPacked; ++k) h[k] -= o.h[k];
    return *this;
  }
  Jet& operator*=(double c) {
    v *= c;
    for (auto& x : g) x *= c;
    for (auto& x : h) x *= c;
    return *this;
  }
  Jet& operator+=(double c) {
    v += c;
    return *this;
  }
  Jet& operator-=(double c) {
    v -= c;
    return *this;
  }
};

namespace detail {

// f(a) given f(a.v), f'(a.v), f''(a.v).
template <int N>
Jet<N> chain(const Jet<N>& a, double f0, double f1, double f2) {
  Jet<N> r(f0);
  for (int i = 0; i < N; ++i) r.g[i] = f1 * a.g[i];
  int k = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j, ++k) r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
  return r;
}

} // namespace detail

template <int N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N>
Jet<N> operator+(Jet<N> a, double c) { return a += c; }
template <int N>
Jet<N> operator+(double c, Jet<N> a) { return a += c; }
template <int N>
Jet<N> operator-(Jet<N> a, double c) { return a -= c; }
template <int N>
Jet<N> operator-(double c, const Jet<N>& a) {
  Jet<N> r = a;
  r *= -1.0;
  return r += c;
}
template <int N>
Jet<N> operator-(Jet<N> a) { return a *= -1.0; }
template <int N>
Jet<N> operator*(Jet<N> a, double c) { return a *= c; }
template <int N>
Jet<N> operator*(double c, Jet<N> a) { return a *= c; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r(a.v * b.v);
  for (int i = 0; i < N; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  int k = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j, ++k)
      r.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
  return r;
}

template <int N>
Jet<N> reciprocal(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) { return a * reciprocal(b); }
template <int N>
Jet<N> operator/(Jet<N> a, double c) { return a *= 1.0 / c; }
template <int N>
Jet<N> operator/(double c, const Jet<N>& a) { return reciprocal(a) * c; }

template <int N>
Jet<N> log(const Jet<N>& a) {
  const double inv = 1.0 / a.v;
  return detail::chain(a, std::log(a.v), inv, -inv * inv);
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) { return x.v; }

// Largest number of free physical variables in any inverse model
// (r, T, u1, u2|v1, v_ref, t_nom never all appear together).
inline constexpr int kMaxModelVars = 6;
using ModelJet = Jet<kMaxModelVars>;

} // namespace invcarson
