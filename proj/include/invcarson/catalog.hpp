#pragma once

// Constants, material and conductor standards, configurations and variable
// bounds. A Catalog is immutable once loaded and may be shared freely between
// worker threads.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace invcarson {

struct CarsonConstants {
  double k1 = 0.0; // resistance offset [Ohm/km]
  double k2 = 0.0; // reactance scale [Ohm/km]
  double k3 = 0.0; // inverse-length scale [1/mm]
  double k4 = 0.0; // dimensionless offset
  double k5 = 0.0; // potential-coefficient scale [km/uF]
  double f_fund = 50.0; // [Hz]

  bool operator==(const CarsonConstants&) const = default;
};

/// Modified Carson constants in per-km / per-mm units, 50 Hz fundamental.
CarsonConstants carson_constants();

struct MaterialSpec {
  std::string name;
  double rho = 0.0;   // resistivity at 20 degC [1e-9 Ohm m]
  double alpha = 0.0; // temperature coefficient [1/degC]

  bool operator==(const MaterialSpec&) const = default;
};

struct StrandClass {
  int N = 0;
  double K_gmr = 0.0;
  std::optional<double> K_r; // absent for sector-shaped conductors

  bool operator==(const StrandClass&) const = default;
};

enum class Family {
  OhHorizontal4w,
  OhNeutralUnder,
  OhHorizontal3w,
  OhTriangular,
  OhHorizontal2w,
  Cable4Core,
  Cable3Core,
  Cable2Core,
};

enum class LineKind { Overhead, Cable };

std::string_view to_string(Family family);
std::string_view to_string(LineKind kind);
Family family_from_string(std::string_view text);
LineKind line_kind_from_string(std::string_view text);
int conductor_count(Family family);
LineKind kind_of(Family family);

struct ConfigSpec {
  std::string name;
  int n_cond = 0;
  Family family = Family::OhHorizontal3w;
  StrandClass strand;
  std::optional<double> theta_deg; // apex angle, triangular family only
  LineKind kind = LineKind::Overhead;

  bool is_cable() const { return kind == LineKind::Cable; }
  bool is_sector() const { return !strand.K_r.has_value(); }
  bool operator==(const ConfigSpec&) const = default;
};

struct ConductorCatalogEntry {
  std::string code;
  LineKind kind = LineKind::Overhead;
  std::vector<int> n_cond;
  double area_std = 0.0; // [mm^2]
  double r_std = 0.0;    // strand radius [mm]
  int N = 0;
  std::string material;
  std::optional<double> t_nom_std; // insulation thickness [mm], cables only

  bool operator==(const ConductorCatalogEntry&) const = default;
};

struct BoundSet {
  double r_min = 0.0, r_max = 0.0;               // [mm]
  double A_min = 0.0, A_max = 0.0;               // [mm^2], circular stranded
  double A_min_sector = 0.0, A_max_sector = 0.0; // [mm^2], sector stranded
  double T_min = 0.0, T_max = 0.0;               // [degC]
  double t_nom_min = 0.0, t_nom_max = 0.0;       // [mm]
  double D_min_OH = 0.0;                         // [mm]
  double u_max_OH = 0.0;                         // [mm]
  double u_min_cable = 0.0, u_max_cable = 0.0;   // [mm]
  double v_ref_min_OH = 0.0, v_ref_max_OH = 0.0;       // [mm]
  double v_ref_min_cable = 0.0, v_ref_max_cable = 0.0; // [mm]

  double v_ref_min(LineKind k) const { return k == LineKind::Cable ? v_ref_min_cable : v_ref_min_OH; }
  double v_ref_max(LineKind k) const { return k == LineKind::Cable ? v_ref_max_cable : v_ref_max_OH; }

  bool operator==(const BoundSet&) const = default;
};

struct StandardGeometry {
  std::string config;
  std::optional<double> u1, u2, v1, v_ref; // [mm]

  bool operator==(const StandardGeometry&) const = default;
};

/// One (configuration, material) pair enumerated during recovery.
struct Combination {
  ConfigSpec config;
  MaterialSpec material;

  std::string name() const { return config.name + "/" + material.name; }
  bool operator==(const Combination&) const = default;
};

class Catalog {
public:
  CarsonConstants constants;
  std::vector<MaterialSpec> materials;
  std::vector<StrandClass> strand_classes;
  std::vector<ConfigSpec> configs;
  std::vector<ConductorCatalogEntry> conductors;
  BoundSet bounds;
  std::vector<StandardGeometry> standard_geometries;

  const MaterialSpec& material(std::string_view name) const;
  const StrandClass& strand(int N) const;
  const ConfigSpec& config(std::string_view name) const;
  const ConductorCatalogEntry& conductor(std::string_view code) const;
  const StandardGeometry* standard_geometry(std::string_view config_name) const;

  bool operator==(const Catalog&) const = default;
};

/// Parses and validates a catalog file. Throws Error(Schema) on malformed input
/// and Error(Validation) when an invariant fails.
Catalog load_catalog(const std::filesystem::path& path);
Catalog parse_catalog(std::string_view json_text, std::string_view source = "<memory>");
std::string serialize_catalog(const Catalog& catalog);

/// The catalog compiled into the library.
const Catalog& default_catalog();
std::string_view default_catalog_text();

void validate_catalog(const Catalog& catalog);

/// Configurations x materials considered for one line kind. Two-conductor
/// families are never included.
std::vector<Combination> candidate_combinations(LineKind kind, const Catalog& catalog);

} // namespace invcarson
