#include "invcarson/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace invcarson {

namespace {

constexpr const char* kVarNames[kGeomVarCount] = {"u1", "u2", "v1", "v_ref"};

std::optional<double> slot(const GeometryVars& v, int k) {
  switch (k) {
  case 0: return v.u1;
  case 1: return v.u2;
  case 2: return v.v1;
  default: return v.v_ref;
  }
}

LinearConstraint bound(std::string rule, GeomVar var, double lo, double hi) {
  LinearConstraint c;
  c.rule = std::move(rule);
  c.coeff[static_cast<int>(var)] = 1.0;
  c.lower = lo;
  c.upper = hi;
  return c;
}

LinearConstraint difference(std::string rule, GeomVar plus, GeomVar minus, double lo) {
  LinearConstraint c;
  c.rule = std::move(rule);
  c.coeff[static_cast<int>(plus)] = 1.0;
  c.coeff[static_cast<int>(minus)] = -1.0;
  c.lower = lo;
  return c;
}

} // namespace

std::array<bool, kGeomVarCount> free_geometry_vars(Family family) {
  switch (family) {
  case Family::OhHorizontal4w: return {true, true, false, true};
  case Family::OhNeutralUnder: return {true, false, true, true};
  default: return {true, false, false, true};
  }
}

CoordinateSet place_conductors(const ConfigSpec& config, const GeometryVars& vars) {
  const auto need = free_geometry_vars(config.family);
  for (int k = 0; k < kGeomVarCount; ++k) {
    const auto v = slot(vars, k);
    if (need[k] && !v)
      fail(ErrorKind::Contract, config.name + ": geometry variable " + kVarNames[k] + " is required");
    if (!need[k] && v)
      fail(ErrorKind::Contract, config.name + ": geometry variable " + kVarNames[k] + " is not used by this family");
    if (v && !std::isfinite(*v)) fail(ErrorKind::Domain, std::string(kVarNames[k]) + " is not finite");
    if (v && k != 3 && *v < 0) fail(ErrorKind::Domain, std::string(kVarNames[k]) + " must be nonnegative");
  }
  if (vars.u1 && vars.u2 && *vars.u1 > *vars.u2) fail(ErrorKind::Domain, "u1 must not exceed u2");

  const Coords<double> c = place<double>(config.family, config.theta_deg.value_or(0.0), vars.u1.value_or(0.0),
                                         vars.u2.value_or(0.0), vars.v1.value_or(0.0), vars.v_ref.value_or(0.0));
  CoordinateSet out;
  out.x.assign(c.x.begin(), c.x.begin() + c.n);
  out.y.assign(c.y.begin(), c.y.begin() + c.n);
  return out;
}

DistanceSet distance_matrices(const CoordinateSet& coords) {
  const int n = static_cast<int>(coords.x.size());
  if (n < 1 || n > kMaxConductors || coords.y.size() != coords.x.size())
    fail(ErrorKind::Contract, "coordinate vectors must have equal length between 1 and 4");
  Coords<double> c;
  c.n = n;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(coords.x[i]) || !std::isfinite(coords.y[i])) fail(ErrorKind::Domain, "non-finite coordinate");
    c.x[i] = coords.x[i];
    c.y[i] = coords.y[i];
  }
  const Distances<double> d = distances(c);
  for (int i = 0; i < n; ++i) {
    if (d.S(i, i) <= 0.0)
      fail(ErrorKind::DegenerateGeometry, "conductor " + std::to_string(i) + " coincides with its image (y = 0)");
    for (int j = 0; j < n; ++j)
      if (i != j && d.D(i, j) <= 0.0)
        fail(ErrorKind::DegenerateGeometry,
             "conductors " + std::to_string(i) + " and " + std::to_string(j) + " are coincident");
  }
  return {d.D, d.S};
}

GeometryConstraintSet geometry_constraints(const ConfigSpec& config, const BoundSet& b) {
  const double inf = std::numeric_limits<double>::infinity();
  const double dmin = b.D_min_OH;
  GeometryConstraintSet set;
  auto& cs = set.constraints;
  switch (config.family) {
  case Family::OhHorizontal4w:
    cs.push_back(bound("u2 <= u_max_OH", GeomVar::U2, -inf, b.u_max_OH));
    cs.push_back(difference("u2 >= u1 + D_min", GeomVar::U2, GeomVar::U1, dmin));
    cs.push_back(bound("u1 >= D_min/2", GeomVar::U1, dmin / 2, inf));
    break;
  case Family::OhNeutralUnder:
    cs.push_back(bound("D_min <= u1 <= u_max_OH", GeomVar::U1, dmin, b.u_max_OH));
    cs.push_back(bound("v1 >= D_min", GeomVar::V1, dmin, inf));
    cs.push_back(difference("v_ref >= v1", GeomVar::VRef, GeomVar::V1, 0.0));
    break;
  case Family::OhHorizontal3w:
    cs.push_back(bound("D_min <= u1 <= u_max_OH", GeomVar::U1, dmin, b.u_max_OH));
    break;
  case Family::OhTriangular: {
    const double theta = config.theta_deg.value_or(0.0) * 3.14159265358979323846 / 180.0;
    const double lo = std::max(dmin / 2, dmin * std::cos(theta));
    cs.push_back(bound("max(D_min/2, D_min cos theta) <= u1 <= u_max_OH", GeomVar::U1, lo, b.u_max_OH));
    break;
  }
  case Family::OhHorizontal2w:
    cs.push_back(bound("D_min/2 <= u1 <= u_max_OH", GeomVar::U1, dmin / 2, b.u_max_OH));
    break;
  case Family::Cable4Core:
  case Family::Cable3Core:
  case Family::Cable2Core:
    cs.push_back(bound("u_min_cable <= u1 <= u_max_cable", GeomVar::U1, b.u_min_cable, b.u_max_cable));
    break;
  }
  cs.push_back(bound("v_ref_min <= v_ref <= v_ref_max", GeomVar::VRef, b.v_ref_min(config.kind),
                     b.v_ref_max(config.kind)));
  return set;
}

std::vector<std::string> GeometryConstraintSet::violations(const GeometryVars& vars, double tol) const {
  std::vector<std::string> out;
  for (const auto& c : constraints) {
    double s = 0.0;
    bool missing = false;
    for (int k = 0; k < kGeomVarCount; ++k) {
      if (c.coeff[k] == 0.0) continue;
      const auto v = slot(vars, k);
      if (!v) {
        missing = true;
        break;
      }
      s += c.coeff[k] * *v;
    }
    if (missing) {
      out.push_back(c.rule + " (variable missing)");
    } else if (s < c.lower - tol || s > c.upper + tol) {
      out.push_back(c.rule);
    }
  }
  return out;
}

} // namespace invcarson
