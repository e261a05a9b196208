#include "invcarson/conductor.hpp"

#include <cmath>
#include <string>

#include "invcarson/error.hpp"

namespace invcarson {

double strand_area(int N, double r) {
  if (r < 0) fail(ErrorKind::Domain, "strand radius must be nonnegative, got " + std::to_string(r));
  return area_of(N, r);
}

double dc_resistance(const MaterialSpec& material, double A, double T) {
  if (!(A > 0)) fail(ErrorKind::Domain, "conductor area must be positive, got " + std::to_string(A));
  return dc_resistance_of(material, A, T);
}

double ac_resistance(double R_dc, double C_s, double C_p) {
  if (C_s < 0 || C_p < 0) fail(ErrorKind::Domain, "skin and proximity factors must be nonnegative");
  return (1.0 + C_s) * (1.0 + C_p) * R_dc;
}

double gmr(const StrandClass& strand, double r) { return strand.K_gmr * r; }

std::pair<double, double> core_radii(const StrandClass& strand, double r, double t_nom) {
  if (!strand.K_r)
    fail(ErrorKind::UnsupportedGeometry,
         "no packing coefficient for N=" + std::to_string(strand.N) + " (sector-shaped cores)");
  if (r < 0 || t_nom < 0) fail(ErrorKind::Domain, "radius and insulation thickness must be nonnegative");
  const double R = *strand.K_r * r;
  return {R, R + t_nom};
}

ConductorState conductor_state(const ConfigSpec& config, const MaterialSpec& material, double r, double T,
                               double t_nom, double C_s, double C_p) {
  ConductorState s;
  s.r = r;
  s.T = T;
  s.t_nom = t_nom;
  s.C_s = C_s;
  s.C_p = C_p;
  s.A = strand_area(config.strand.N, r);
  s.R_dc = dc_resistance(material, s.A, T);
  s.R_ac = ac_resistance(s.R_dc, C_s, C_p);
  s.GMR = gmr(config.strand, r);
  if (config.strand.K_r) {
    const auto [R, R_nom] = core_radii(config.strand, r, t_nom);
    s.R = R;
    s.R_nom = R_nom;
  }
  return s;
}

double radius_for_area(int N, double A) {
  if (A < 0 || N <= 0) fail(ErrorKind::Domain, "area must be nonnegative and N positive");
  return std::sqrt(A / (N * kPi));
}

} // namespace invcarson
