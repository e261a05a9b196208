#include "invcarson/forward.hpp"

#include <cmath>

namespace invcarson {

std::string_view to_string(Unit unit) {
  switch (unit) {
  case Unit::OhmPerKm: return "ohm/km";
  case Unit::KmPerMicroF: return "km/uF";
  case Unit::MicroFPerKm: return "uF/km";
  case Unit::MicroSPerKm: return "uS/km";
  }
  return "?";
}

const TransformMatrix& transform_matrix() {
  static const TransformMatrix t = [] {
    TransformMatrix m;
    const std::complex<double> a = std::polar(1.0, 2.0 * kPi / 3.0);
    const std::complex<double> A[3][3] = {{1.0, 1.0, 1.0}, {1.0, a * a, a}, {1.0, a, a * a}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        m.re[i][j] = A[i][j].real();
        m.im[i][j] = A[i][j].imag();
        m.inv_re[i][j] = A[i][j].real() / 3.0;
        m.inv_im[i][j] = -A[i][j].imag() / 3.0;
      }
    return m;
  }();
  return t;
}

namespace {

ComplexMatrix to_complex(const CMatrix<double>& m, Unit unit) {
  ComplexMatrix out;
  out.unit = unit;
  out.m = SmallMatrix<std::complex<double>>(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out(i, j) = {m.re(i, j), m.im(i, j)};
  return out;
}

CMatrix<double> to_pair(const ComplexMatrix& z) {
  CMatrix<double> out(z.dim());
  for (int i = 0; i < z.dim(); ++i)
    for (int j = 0; j < z.dim(); ++j) {
      out.re(i, j) = z(i, j).real();
      out.im(i, j) = z(i, j).imag();
    }
  return out;
}

Distances<double> to_generic(const DistanceSet& d) { return {d.D, d.S}; }

void require_dim(const ComplexMatrix& m, int n, const char* what) {
  if (m.dim() != n) fail(ErrorKind::Contract, std::string(what) + " expects a " + std::to_string(n) + "x" +
                                                  std::to_string(n) + " matrix, got dimension " +
                                                  std::to_string(m.dim()));
}

double norm1(const SmallMatrix<double>& m) {
  double best = 0.0;
  for (int j = 0; j < m.n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.n; ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

} // namespace

ComplexMatrix series_impedance(double R_ac, double GMR, const DistanceSet& dist, const CarsonConstants& k) {
  if (!(GMR > 0)) fail(ErrorKind::LogDomain, "GMR must be positive, got " + std::to_string(GMR));
  for (int i = 0; i < dist.D.n; ++i)
    for (int j = 0; j < dist.D.n; ++j)
      if (i != j && !(dist.D(i, j) > 0)) fail(ErrorKind::LogDomain, "conductor distance must be positive");
  return to_complex(detail::carson_matrix(R_ac, GMR, to_generic(dist), k), Unit::OhmPerKm);
}

ComplexMatrix kron_reduce(const ComplexMatrix& Z) {
  require_dim(Z, 4, "Kron reduction");
  if (std::abs(Z(3, 3)) == 0.0) fail(ErrorKind::SingularNeutral, "neutral self impedance is zero");
  return to_complex(detail::kron(to_pair(Z)), Z.unit);
}

ComplexMatrix sequence_impedance(const ComplexMatrix& Z) {
  require_dim(Z, 3, "sequence transform");
  return to_complex(detail::similarity_012(to_pair(Z)), Z.unit);
}

ComplexMatrix potential_matrix(const DistanceSet& dist, double R, const CarsonConstants& k) {
  if (!(R > 0)) fail(ErrorKind::LogDomain, "core radius must be positive, got " + std::to_string(R));
  const int n = dist.D.n;
  for (int i = 0; i < n; ++i) {
    if (!(dist.S(i, i) > R))
      fail(ErrorKind::ConductorTouchesGround, "conductor " + std::to_string(i) + " image distance " +
                                                  std::to_string(dist.S(i, i)) + " mm does not exceed its radius");
    for (int j = 0; j < n; ++j)
      if (i != j && !(dist.D(i, j) > 0 && dist.S(i, j) > 0))
        fail(ErrorKind::LogDomain, "nonpositive distance in potential coefficient");
  }
  const SmallMatrix<double> P = detail::potential(to_generic(dist), R, k);
  ComplexMatrix out;
  out.unit = Unit::KmPerMicroF;
  out.m = SmallMatrix<std::complex<double>>(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = P(i, j);
  return out;
}

std::pair<ComplexMatrix, ComplexMatrix> shunt_admittance(const ComplexMatrix& P, double f_fund) {
  const int n = P.dim();
  SmallMatrix<double> p(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = P(i, j).real();
  const SmallMatrix<double> c = detail::invert(p);
  if (norm1(p) * norm1(c) > 1e12) fail(ErrorKind::DegenerateGeometry, "potential coefficient matrix is ill-conditioned");

  ComplexMatrix C, Y;
  C.unit = Unit::MicroFPerKm;
  Y.unit = Unit::MicroSPerKm;
  C.m = SmallMatrix<std::complex<double>>(n);
  Y.m = SmallMatrix<std::complex<double>>(n);
  const double w = 2.0 * kPi * f_fund;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      C(i, j) = c(i, j);
      Y(i, j) = {0.0, w * c(i, j)};
    }
  return {C, Y};
}

ComplexMatrix abc_block(const ComplexMatrix& Y) {
  if (Y.dim() < 3) fail(ErrorKind::Contract, "abc block needs at least three conductors");
  ComplexMatrix out;
  out.unit = Y.unit;
  out.m = SmallMatrix<std::complex<double>>(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = Y(i, j);
  return out;
}

ComplexMatrix sequence_admittance(const ComplexMatrix& Y_abc) {
  require_dim(Y_abc, 3, "sequence admittance");
  return to_complex(detail::similarity_012(to_pair(Y_abc)), Y_abc.unit);
}

namespace {

void check_bounds(const ConfigSpec& config, const ConductorState& s, const GeometryVars& g, const BoundSet& b) {
  auto out_of = [](double v, double lo, double hi) { return v < lo - 1e-9 || v > hi + 1e-9; };
  if (out_of(s.r, b.r_min, b.r_max))
    fail(ErrorKind::BoundViolation, "strand radius " + std::to_string(s.r) + " mm outside [" +
                                        std::to_string(b.r_min) + ", " + std::to_string(b.r_max) + "]");
  const double a_lo = config.is_sector() ? b.A_min_sector : b.A_min;
  const double a_hi = config.is_sector() ? b.A_max_sector : b.A_max;
  if (out_of(s.A, a_lo, a_hi))
    fail(ErrorKind::BoundViolation, "area " + std::to_string(s.A) + " mm2 outside [" + std::to_string(a_lo) + ", " +
                                        std::to_string(a_hi) + "]");
  if (out_of(s.T, b.T_min, b.T_max))
    fail(ErrorKind::BoundViolation, "temperature " + std::to_string(s.T) + " degC outside bounds");
  if (config.is_cable() && out_of(s.t_nom, b.t_nom_min, b.t_nom_max))
    fail(ErrorKind::BoundViolation, "insulation thickness " + std::to_string(s.t_nom) + " mm outside bounds");
  const auto bad = geometry_constraints(config, b).violations(g, 1e-6);
  if (!bad.empty()) fail(ErrorKind::BoundViolation, "geometry constraint violated: " + bad.front());
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

} // namespace

ImpedanceSet forward_chain(const ConfigSpec& config, const MaterialSpec& material, const LineInput& in,
                           const ForwardOptions& opt) {
  ImpedanceSet out;
  out.conductor = staged("conductor", [&] {
    return conductor_state(config, material, in.r, in.T, config.is_cable() ? in.t_nom : 0.0, in.C_s, in.C_p);
  });

  GeometryVars g = in.geometry;
  if (config.is_cable() && !config.is_sector()) {
    // Round cores touch: the centre offset is the insulated core radius.
    if (g.u1 && std::abs(*g.u1 - out.conductor.R_nom) > 1e-9 * std::max(1.0, out.conductor.R_nom))
      fail(ErrorKind::Contract, "geometry: u1 of a circular-core cable must equal R_nom");
    g.u1 = out.conductor.R_nom;
  }
  if (opt.bounds) staged("bounds", [&] { check_bounds(config, out.conductor, g, *opt.bounds); });

  out.coords = staged("geometry", [&] { return place_conductors(config, g); });
  out.distances = staged("geometry", [&] { return distance_matrices(out.coords); });

  staged("series", [&] {
    out.Z_carson = series_impedance(out.conductor.R_ac, out.conductor.GMR, out.distances, opt.constants);
    if (config.n_cond == 4) {
      out.Z_kron = kron_reduce(out.Z_carson);
    } else if (config.n_cond == 3) {
      out.Z_kron = out.Z_carson;
    } else {
      fail(ErrorKind::UnsupportedGeometry, "sequence components need a 3- or 4-conductor line");
    }
    out.Z_012 = sequence_impedance(out.Z_kron);
  });
  out.seq.R00 = out.Z_012(0, 0).real();
  out.seq.X00 = out.Z_012(0, 0).imag();
  out.seq.R11 = out.Z_012(1, 1).real();
  out.seq.X11 = out.Z_012(1, 1).imag();

  if (opt.include_shunt) {
    staged("shunt", [&] {
      if (config.is_sector())
        fail(ErrorKind::UnsupportedGeometry, config.name + " has no packing coefficient; shunt chain unavailable");
      out.P = potential_matrix(out.distances, out.conductor.R, opt.constants);
      auto [C, Y] = shunt_admittance(*out.P, opt.constants.f_fund);
      out.C = C;
      out.Y = Y;
      out.Y_012 = sequence_admittance(abc_block(Y));
    });
    out.seq.B00 = (*out.Y_012)(0, 0).imag();
    out.seq.B11 = (*out.Y_012)(1, 1).imag();
  }
  return out;
}

SequenceComponents forward_pipeline(const ConfigSpec& config, const MaterialSpec& material, const LineInput& input,
                                    const ForwardOptions& options) {
  return forward_chain(config, material, input, options).seq;
}

LineInput standard_line_input(const Catalog& catalog, const ConfigSpec& config, const ConductorCatalogEntry& entry,
                              double T) {
  const StandardGeometry* sg = catalog.standard_geometry(config.name);
  if (!sg) fail(ErrorKind::Contract, "no standard geometry for configuration " + config.name);
  LineInput in;
  in.r = entry.r_std;
  in.T = T;
  in.t_nom = config.is_cable() ? entry.t_nom_std.value_or(0.0) : 0.0;
  in.geometry.u1 = sg->u1;
  in.geometry.u2 = sg->u2;
  in.geometry.v1 = sg->v1;
  in.geometry.v_ref = sg->v_ref;
  if (config.is_cable() && !config.is_sector()) in.geometry.u1.reset();
  return in;
}

} // namespace invcarson
