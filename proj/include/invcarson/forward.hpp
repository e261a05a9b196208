#pragma once

// Forward chain: Carson series impedance, Kron reduction, symmetrical
// component transform, and the shunt chain P -> C -> Y -> Y012.

#include <array>
#include <complex>
#include <optional>
#include <string>

#include "invcarson/catalog.hpp"
#include "invcarson/conductor.hpp"
#include "invcarson/error.hpp"
#include "invcarson/geometry.hpp"
#include "invcarson/jet.hpp"
#include "invcarson/small_matrix.hpp"

namespace invcarson {

enum class Unit { OhmPerKm, KmPerMicroF, MicroFPerKm, MicroSPerKm };
std::string_view to_string(Unit unit);

struct ComplexMatrix {
  Unit unit = Unit::OhmPerKm;
  SmallMatrix<std::complex<double>> m;

  int dim() const { return m.n; }
  std::complex<double> operator()(int i, int j) const { return m(i, j); }
  std::complex<double>& operator()(int i, int j) { return m(i, j); }
};

struct SequenceComponents {
  double R00 = 0.0, R11 = 0.0, X00 = 0.0, X11 = 0.0; // [Ohm/km]
  std::optional<double> B00, B11;                    // [uS/km]

  bool has_shunt() const { return B00.has_value() && B11.has_value(); }
};

/// A = Are + j Aim with alpha = exp(j 2 pi / 3); A^-1 = (Are - j Aim) / 3.
struct TransformMatrix {
  std::array<std::array<double, 3>, 3> re{};
  std::array<std::array<double, 3>, 3> im{};
  std::array<std::array<double, 3>, 3> inv_re{};
  std::array<std::array<double, 3>, 3> inv_im{};
};
const TransformMatrix& transform_matrix();

ComplexMatrix series_impedance(double R_ac, double GMR, const DistanceSet& dist,
                               const CarsonConstants& k = carson_constants());
ComplexMatrix kron_reduce(const ComplexMatrix& Z);
ComplexMatrix sequence_impedance(const ComplexMatrix& Z);
ComplexMatrix potential_matrix(const DistanceSet& dist, double R, const CarsonConstants& k = carson_constants());
/// Returns (C [uF/km], Y [uS/km]).
std::pair<ComplexMatrix, ComplexMatrix> shunt_admittance(const ComplexMatrix& P, double f_fund);
ComplexMatrix sequence_admittance(const ComplexMatrix& Y_abc);

/// Leading 3x3 block of a 4x4 admittance (no neutral elimination).
ComplexMatrix abc_block(const ComplexMatrix& Y);

struct LineInput {
  double r = 0.0;     // strand radius [mm]
  double T = 20.0;    // [degC]
  double t_nom = 0.0; // insulation [mm], cables
  GeometryVars geometry;
  double C_s = 0.0;
  double C_p = 0.0;
};

struct ForwardOptions {
  bool include_shunt = true;
  CarsonConstants constants = carson_constants();
  /// When set, inputs are checked against these bounds first.
  const BoundSet* bounds = nullptr;
};

/// Every matrix in the chain for one line, for debugging and reports.
struct ImpedanceSet {
  ConductorState conductor;
  CoordinateSet coords;
  DistanceSet distances;
  ComplexMatrix Z_carson, Z_kron, Z_012;
  std::optional<ComplexMatrix> P, C, Y, Y_012;
  SequenceComponents seq;
};

ImpedanceSet forward_chain(const ConfigSpec& config, const MaterialSpec& material, const LineInput& input,
                           const ForwardOptions& options = {});
SequenceComponents forward_pipeline(const ConfigSpec& config, const MaterialSpec& material, const LineInput& input,
                                    const ForwardOptions& options = {});

/// Forward input for a catalog conductor on its configuration's standard
/// geometry at temperature T.
LineInput standard_line_input(const Catalog& catalog, const ConfigSpec& config, const ConductorCatalogEntry& entry,
                              double T);

// ---------------------------------------------------------------------------
// Generic chain over a scalar type, used by the optimizer. Inputs are the
// physical line parameters; for circular cables the caller passes
// u1 = K_r r + t_nom.

template <class S>
struct LinePoint {
  S r, T, u1, u2, v1, v_ref;
};

template <class S>
struct SequenceOut {
  S R00, X00, R11, X11, B00, B11;
  bool has_shunt = false;
};

namespace detail {

template <class S>
CMatrix<S> similarity_012(const CMatrix<S>& M) {
  // A^-1 M A over real/imag parts.
  const auto& t = transform_matrix();
  CMatrix<S> MA(3), out(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      S re(0.0), im(0.0);
      for (int k = 0; k < 3; ++k) {
        re += M.re(i, k) * t.re[k][j] - M.im(i, k) * t.im[k][j];
        im += M.re(i, k) * t.im[k][j] + M.im(i, k) * t.re[k][j];
      }
      MA.re(i, j) = re;
      MA.im(i, j) = im;
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      S re(0.0), im(0.0);
      for (int k = 0; k < 3; ++k) {
        re += MA.re(k, j) * t.inv_re[i][k] - MA.im(k, j) * t.inv_im[i][k];
        im += MA.im(k, j) * t.inv_re[i][k] + MA.re(k, j) * t.inv_im[i][k];
      }
      out.re(i, j) = re;
      out.im(i, j) = im;
    }
  return out;
}

template <class S>
CMatrix<S> carson_matrix(const S& R_ac, const S& GMR, const Distances<S>& d, const CarsonConstants& k) {
  using std::log;
  const int n = d.D.n;
  CMatrix<S> Z(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        Z.re(i, i) = R_ac + k.k1;
        Z.im(i, i) = (log(1.0 / (GMR * k.k3)) + k.k4) * k.k2;
      } else {
        Z.re(i, j) = S(k.k1);
        Z.im(i, j) = (log(1.0 / (d.D(i, j) * k.k3)) + k.k4) * k.k2;
      }
    }
  return Z;
}

template <class S>
CMatrix<S> kron(const CMatrix<S>& Z) {
  CMatrix<S> out(3);
  const Cplx<S> znn = Z.at(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.set(i, j, Z.at(i, j) - Z.at(i, 3) * Z.at(3, j) / znn);
  return out;
}

// Gauss-Jordan inverse with partial pivoting on values.
template <class S>
SmallMatrix<S> invert(SmallMatrix<S> M) {
  const int n = M.n;
  SmallMatrix<S> inv(n);
  for (int i = 0; i < n; ++i) inv(i, i) = S(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(value_of(M(i, col))) > std::abs(value_of(M(piv, col)))) piv = i;
    if (value_of(M(piv, col)) == 0.0) fail(ErrorKind::DegenerateGeometry, "singular potential coefficient matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(M(piv, j), M(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const S d = M(col, col);
    for (int j = 0; j < n; ++j) {
      M(col, j) = M(col, j) / d;
      inv(col, j) = inv(col, j) / d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      const S f = M(i, col);
      if (value_of(f) == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        M(i, j) = M(i, j) - f * M(col, j);
        inv(i, j) = inv(i, j) - f * inv(col, j);
      }
    }
  }
  return inv;
}

template <class S>
SmallMatrix<S> potential(const Distances<S>& d, const S& R, const CarsonConstants& k) {
  using std::log;
  const int n = d.D.n;
  SmallMatrix<S> P(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) = (i == j ? log(d.S(i, i) / R) : log(d.S(i, j) / d.D(i, j))) * k.k5;
  return P;
}

} // namespace detail

template <class S>
SequenceOut<S> sequence_chain(const ConfigSpec& config, const MaterialSpec& material, const CarsonConstants& k,
                              const LinePoint<S>& p, bool include_shunt) {
  const double theta = config.theta_deg.value_or(0.0);
  const Coords<S> c = place<S>(config.family, theta, p.u1, p.u2, p.v1, p.v_ref);
  const Distances<S> d = distances(c);

  const S A = area_of(config.strand.N, p.r);
  const S R_ac = dc_resistance_of(material, A, p.T);
  const S GMR = p.r * config.strand.K_gmr;

  CMatrix<S> Z = detail::carson_matrix(R_ac, GMR, d, k);
  if (c.n == 4) Z = detail::kron(Z);
  const CMatrix<S> Z012 = detail::similarity_012(Z);

  SequenceOut<S> out{Z012.re(0, 0), Z012.im(0, 0), Z012.re(1, 1), Z012.im(1, 1), S(0.0), S(0.0), false};
  if (include_shunt) {
    if (!config.strand.K_r) fail(ErrorKind::UnsupportedGeometry, "shunt chain needs K_r, absent for " + config.name);
    const S R = p.r * *config.strand.K_r;
    const SmallMatrix<S> C = detail::invert(detail::potential(d, R, k));
    // Y = j 2 pi f C is purely imaginary; only its abc block is transformed.
    const double w = 2.0 * kPi * k.f_fund;
    CMatrix<S> Y(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Y.im(i, j) = C(i, j) * w;
    const CMatrix<S> Y012 = detail::similarity_012(Y);
    out.B00 = Y012.im(0, 0);
    out.B11 = Y012.im(1, 1);
    out.has_shunt = true;
  }
  return out;
}

} // namespace invcarson
