#pragma once

#include <cmath>
#include <utility>

#include "invcarson/catalog.hpp"

namespace invcarson {

/// Electrical characterisation of one conductor (all conductors of a line
/// share it). Units: mm, mm^2, degC, Ohm/km.
struct ConductorState {
  double r = 0.0;
  double A = 0.0;
  double T = 20.0;
  double R_dc = 0.0;
  double R_ac = 0.0;
  double GMR = 0.0;
  double R = 0.0;
  double R_nom = 0.0;
  double t_nom = 0.0;
  double C_s = 0.0;
  double C_p = 0.0;
};

double strand_area(int N, double r);

/// rho [1e-9 Ohm m] over A [mm^2] is already Ohm/km, so no scale factor
/// appears anywhere downstream.
double dc_resistance(const MaterialSpec& material, double A, double T);

double ac_resistance(double R_dc, double C_s, double C_p);

double gmr(const StrandClass& strand, double r);

/// (R, R_nom). Throws UnsupportedGeometry for sector strands (no K_r).
std::pair<double, double> core_radii(const StrandClass& strand, double r, double t_nom);

/// Fills every derived field from (r, T, t_nom). R and R_nom stay zero for
/// sector strands.
ConductorState conductor_state(const ConfigSpec& config, const MaterialSpec& material, double r, double T,
                               double t_nom = 0.0, double C_s = 0.0, double C_p = 0.0);

/// Strand radius giving a target area.
double radius_for_area(int N, double A);

inline constexpr double kPi = 3.14159265358979323846;

template <class S>
S area_of(int N, const S& r) {
  return r * r * (N * kPi);
}

template <class S>
S dc_resistance_of(const MaterialSpec& m, const S& A, const S& T) {
  return (1.0 + (T - 20.0) * m.alpha) * m.rho / A;
}

} // namespace invcarson
