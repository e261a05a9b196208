#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "invcarson/catalog.hpp"
#include "invcarson/error.hpp"
#include "invcarson/small_matrix.hpp"

namespace invcarson {

/// Free geometry variables [mm]. Which of them a family uses is fixed by the
/// family; v_ref is negative for buried cables.
struct GeometryVars {
  std::optional<double> u1, u2, v1, v_ref;
};

enum class GeomVar { U1 = 0, U2 = 1, V1 = 2, VRef = 3 };
inline constexpr int kGeomVarCount = 4;

/// Conductor coordinates in (a, b, c, n) order, truncated to n_cond.
struct CoordinateSet {
  std::vector<double> x, y;
};

struct DistanceSet {
  SmallMatrix<double> D; // conductor-to-conductor
  SmallMatrix<double> S; // conductor-to-image
};

/// lower <= sum(coeff[k] * var[k]) <= upper over the GeomVar slots.
struct LinearConstraint {
  std::string rule;
  std::array<double, kGeomVarCount> coeff{};
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool references(GeomVar v) const { return coeff[static_cast<int>(v)] != 0.0; }
};

struct GeometryConstraintSet {
  std::vector<LinearConstraint> constraints;

  /// Names of violated rules (tolerance in mm).
  std::vector<std::string> violations(const GeometryVars& vars, double tol = 1e-9) const;
};

/// Which GeomVar slots are free for a family. For the triangular family v1
/// follows from u1 and theta; for circular cables u1 is pinned to R_nom by the
/// caller but is still a coordinate input here.
std::array<bool, kGeomVarCount> free_geometry_vars(Family family);

CoordinateSet place_conductors(const ConfigSpec& config, const GeometryVars& vars);
DistanceSet distance_matrices(const CoordinateSet& coords);
GeometryConstraintSet geometry_constraints(const ConfigSpec& config, const BoundSet& bounds);

// Generic forms shared with the optimizer.

template <class T>
struct Coords {
  int n = 0;
  std::array<T, kMaxConductors> x{}, y{};
};

template <class T>
struct Distances {
  SmallMatrix<T> D, S;
};

template <class T>
Coords<T> place(Family family, double theta_deg, const T& u1, const T& u2, const T& v1, const T& v_ref) {
  Coords<T> c;
  const T zero(0.0);
  switch (family) {
  case Family::OhHorizontal4w:
    c.n = 4;
    c.x = {-u2, -u1, u1, u2};
    c.y = {v_ref, v_ref, v_ref, v_ref};
    break;
  case Family::OhNeutralUnder:
    // Phases across the crossarm, neutral below the centre phase.
    c.n = 4;
    c.x = {-u1, zero, u1, zero};
    c.y = {v_ref, v_ref, v_ref, v_ref - v1};
    break;
  case Family::OhHorizontal3w:
    c.n = 3;
    c.x = {-u1, zero, u1, zero};
    c.y = {v_ref, v_ref, v_ref, zero};
    break;
  case Family::OhTriangular: {
    const double kRad = 3.14159265358979323846 / 180.0;
    const T rise = u1 * std::tan(theta_deg * kRad);
    c.n = 3;
    c.x = {-u1, zero, u1, zero};
    c.y = {v_ref, v_ref + rise, v_ref, zero};
    break;
  }
  case Family::OhHorizontal2w:
    c.n = 2;
    c.x = {-u1, u1, zero, zero};
    c.y = {v_ref, v_ref, zero, zero};
    break;
  case Family::Cable4Core:
    c.n = 4;
    c.x = {u1, -u1, -u1, u1};
    c.y = {v_ref + u1, v_ref + u1, v_ref - u1, v_ref - u1};
    break;
  case Family::Cable3Core: {
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    const T h = u1 * inv_sqrt3;
    c.n = 3;
    c.x = {-u1, zero, u1, zero};
    c.y = {v_ref - h, v_ref + h * 2.0, v_ref - h, zero};
    break;
  }
  case Family::Cable2Core:
    c.n = 2;
    c.x = {-u1, u1, zero, zero};
    c.y = {v_ref, v_ref, zero, zero};
    break;
  }
  return c;
}

template <class T>
Distances<T> distances(const Coords<T>& c) {
  using std::sqrt;
  Distances<T> d{SmallMatrix<T>(c.n), SmallMatrix<T>(c.n)};
  for (int i = 0; i < c.n; ++i) {
    for (int j = 0; j < c.n; ++j) {
      const T dx = c.x[i] - c.x[j];
      const T dy = c.y[i] - c.y[j];
      const T sy = c.y[i] + c.y[j];
      if (i != j) d.D(i, j) = sqrt(dx * dx + dy * dy);
      // On the diagonal this is |2 y_i|, positive for buried conductors too.
      d.S(i, j) = sqrt(dx * dx + sy * sy);
    }
  }
  return d;
}

} // namespace invcarson
