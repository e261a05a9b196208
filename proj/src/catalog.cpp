#include "invcarson/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "invcarson/error.hpp"

namespace invcarson {

using nlohmann::json;

std::string_view default_catalog_text_impl(); // generated at build time

CarsonConstants carson_constants() {
  return CarsonConstants{0.049348, 0.062832, 3.28084e-3, 8.0252, 17.98742, 50.0};
}

namespace {

struct FamilyName {
  Family family;
  std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::OhHorizontal4w, "OH-horizontal-4w"}, {Family::OhNeutralUnder, "OH-neutral-under"},
    {Family::OhHorizontal3w, "OH-horizontal-3w"}, {Family::OhTriangular, "OH-triangular"},
    {Family::OhHorizontal2w, "OH-horizontal-2w"}, {Family::Cable4Core, "cable-4core"},
    {Family::Cable3Core, "cable-3core"},          {Family::Cable2Core, "cable-2core"},
};

} // namespace

std::string_view to_string(Family family) {
  for (const auto& f : kFamilyNames)
    if (f.family == family) return f.name;
  return "unknown";
}

std::string_view to_string(LineKind kind) { return kind == LineKind::Cable ? "cable" : "overhead"; }

Family family_from_string(std::string_view text) {
  for (const auto& f : kFamilyNames)
    if (f.name == text) return f.family;
  fail(ErrorKind::Contract, "unknown geometry family '" + std::string(text) + "'");
}

LineKind line_kind_from_string(std::string_view text) {
  if (text == "overhead" || text == "OH" || text == "oh") return LineKind::Overhead;
  if (text == "cable") return LineKind::Cable;
  fail(ErrorKind::Contract, "unknown line kind '" + std::string(text) + "'");
}

int conductor_count(Family family) {
  switch (family) {
  case Family::OhHorizontal4w:
  case Family::OhNeutralUnder:
  case Family::Cable4Core: return 4;
  case Family::OhHorizontal3w:
  case Family::OhTriangular:
  case Family::Cable3Core: return 3;
  case Family::OhHorizontal2w:
  case Family::Cable2Core: return 2;
  }
  return 0;
}

LineKind kind_of(Family family) {
  switch (family) {
  case Family::Cable4Core:
  case Family::Cable3Core:
  case Family::Cable2Core: return LineKind::Cable;
  default: return LineKind::Overhead;
  }
}

const MaterialSpec& Catalog::material(std::string_view name) const {
  for (const auto& m : materials)
    if (m.name == name) return m;
  fail(ErrorKind::Contract, "unknown material '" + std::string(name) + "'");
}

const StrandClass& Catalog::strand(int N) const {
  for (const auto& s : strand_classes)
    if (s.N == N) return s;
  fail(ErrorKind::Contract, "unknown strand class N=" + std::to_string(N));
}

const ConfigSpec& Catalog::config(std::string_view name) const {
  for (const auto& c : configs)
    if (c.name == name) return c;
  fail(ErrorKind::Contract, "unknown configuration '" + std::string(name) + "'");
}

const ConductorCatalogEntry& Catalog::conductor(std::string_view code) const {
  for (const auto& c : conductors)
    if (c.code == code) return c;
  fail(ErrorKind::Contract, "unknown conductor '" + std::string(code) + "'");
}

const StandardGeometry* Catalog::standard_geometry(std::string_view config_name) const {
  for (const auto& g : standard_geometries)
    if (g.config == config_name) return &g;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void schema(const std::string& field, const std::string& msg) const {
    fail(ErrorKind::Schema, source_ + ": field '" + field + "': " + msg);
  }

  const json& member(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) schema(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema(path + "." + key, "missing");
    return *it;
  }

  double number(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = member(obj, key, path);
    if (!v.is_number()) schema(path + "." + key, "expected a number");
    return v.get<double>();
  }

  int integer(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = member(obj, key, path);
    if (!v.is_number_integer()) schema(path + "." + key, "expected an integer");
    return v.get<int>();
  }

  std::string text(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = member(obj, key, path);
    if (!v.is_string()) schema(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) schema(path + "." + key, "expected a number or null");
    return it->get<double>();
  }

  const json& array(const json& obj, const std::string& key) const {
    const json& v = member(obj, key, "");
    if (!v.is_array()) schema(key, "expected an array");
    return v;
  }

private:
  std::string source_;
};

std::string at(const std::string& key, std::size_t i) { return key + "[" + std::to_string(i) + "]"; }

} // namespace

Catalog parse_catalog(std::string_view json_text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, std::string(source) + ": " + e.what());
  }
  Reader rd{std::string(source)};
  if (!doc.is_object()) rd.schema("<root>", "expected an object");

  Catalog cat;
  const json& k = rd.member(doc, "constants", "");
  cat.constants.k1 = rd.number(k, "k1", "constants");
  cat.constants.k2 = rd.number(k, "k2", "constants");
  cat.constants.k3 = rd.number(k, "k3", "constants");
  cat.constants.k4 = rd.number(k, "k4", "constants");
  cat.constants.k5 = rd.number(k, "k5", "constants");
  cat.constants.f_fund = rd.optional_number(k, "f_fund", "constants").value_or(50.0);

  const json& mats = rd.array(doc, "materials");
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const std::string p = at("materials", i);
    cat.materials.push_back({rd.text(mats[i], "name", p), rd.number(mats[i], "rho", p), rd.number(mats[i], "alpha", p)});
  }

  const json& strands = rd.array(doc, "strand_classes");
  for (std::size_t i = 0; i < strands.size(); ++i) {
    const std::string p = at("strand_classes", i);
    cat.strand_classes.push_back(
        {rd.integer(strands[i], "N", p), rd.number(strands[i], "K_gmr", p), rd.optional_number(strands[i], "K_r", p)});
  }

  const json& cfgs = rd.array(doc, "configs");
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const std::string p = at("configs", i);
    ConfigSpec c;
    c.name = rd.text(cfgs[i], "name", p);
    c.n_cond = rd.integer(cfgs[i], "n_cond", p);
    try {
      c.family = family_from_string(rd.text(cfgs[i], "family", p));
      c.kind = line_kind_from_string(rd.text(cfgs[i], "kind", p));
    } catch (const Error& e) {
      rd.schema(p, e.what());
    }
    const int N = rd.integer(cfgs[i], "N", p);
    auto s = std::find_if(cat.strand_classes.begin(), cat.strand_classes.end(),
                          [N](const StrandClass& sc) { return sc.N == N; });
    if (s == cat.strand_classes.end()) rd.schema(p + ".N", "no strand class with N=" + std::to_string(N));
    c.strand = *s;
    c.theta_deg = rd.optional_number(cfgs[i], "theta", p);
    cat.configs.push_back(std::move(c));
  }

  const json& conds = rd.array(doc, "conductors");
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const std::string p = at("conductors", i);
    ConductorCatalogEntry e;
    e.code = rd.text(conds[i], "code", p);
    try {
      e.kind = line_kind_from_string(rd.text(conds[i], "kind", p));
    } catch (const Error& err) {
      rd.schema(p + ".kind", err.what());
    }
    const json& nc = rd.member(conds[i], "n_cond", p);
    if (!nc.is_array()) rd.schema(p + ".n_cond", "expected an array of integers");
    for (const auto& v : nc) {
      if (!v.is_number_integer()) rd.schema(p + ".n_cond", "expected an array of integers");
      e.n_cond.push_back(v.get<int>());
    }
    e.area_std = rd.number(conds[i], "area_std", p);
    e.r_std = rd.number(conds[i], "r_std", p);
    e.N = rd.integer(conds[i], "N", p);
    e.material = rd.text(conds[i], "material", p);
    e.t_nom_std = rd.optional_number(conds[i], "t_nom_std", p);
    cat.conductors.push_back(std::move(e));
  }

  const json& b = rd.member(doc, "bounds", "");
  auto& B = cat.bounds;
  B.r_min = rd.number(b, "r_min", "bounds");
  B.r_max = rd.number(b, "r_max", "bounds");
  B.A_min = rd.number(b, "A_min", "bounds");
  B.A_max = rd.number(b, "A_max", "bounds");
  B.A_min_sector = rd.number(b, "A_min_sector", "bounds");
  B.A_max_sector = rd.number(b, "A_max_sector", "bounds");
  B.T_min = rd.number(b, "T_min", "bounds");
  B.T_max = rd.number(b, "T_max", "bounds");
  B.t_nom_min = rd.number(b, "t_nom_min", "bounds");
  B.t_nom_max = rd.number(b, "t_nom_max", "bounds");
  B.D_min_OH = rd.number(b, "D_min_OH", "bounds");
  B.u_max_OH = rd.number(b, "u_max_OH", "bounds");
  B.u_min_cable = rd.number(b, "u_min_cable", "bounds");
  B.u_max_cable = rd.number(b, "u_max_cable", "bounds");
  B.v_ref_min_OH = rd.number(b, "v_ref_min_OH", "bounds");
  B.v_ref_max_OH = rd.number(b, "v_ref_max_OH", "bounds");
  B.v_ref_min_cable = rd.number(b, "v_ref_min_cable", "bounds");
  B.v_ref_max_cable = rd.number(b, "v_ref_max_cable", "bounds");

  const json& geos = rd.array(doc, "standard_geometries");
  for (std::size_t i = 0; i < geos.size(); ++i) {
    const std::string p = at("standard_geometries", i);
    StandardGeometry g;
    g.config = rd.text(geos[i], "config", p);
    g.u1 = rd.optional_number(geos[i], "u1", p);
    g.u2 = rd.optional_number(geos[i], "u2", p);
    g.v1 = rd.optional_number(geos[i], "v1", p);
    g.v_ref = rd.optional_number(geos[i], "v_ref", p);
    cat.standard_geometries.push_back(std::move(g));
  }

  validate_catalog(cat);
  return cat;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Schema, path.string() + ": cannot open catalog file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str(), path.string());
}

// ---------------------------------------------------------------------------
// Validation

namespace {

[[noreturn]] void invalid(const std::string& entry, const std::string& rule) {
  fail(ErrorKind::Validation, entry + ": " + rule);
}

void check_range(const std::string& name, double lo, double hi) {
  if (!(lo < hi)) invalid("bounds", name + "_min must be strictly less than " + name + "_max");
}

} // namespace

void validate_catalog(const Catalog& cat) {
  const auto& k = cat.constants;
  if (!(k.k1 > 0 && k.k2 > 0 && k.k3 > 0 && k.k4 > 0 && k.k5 > 0))
    invalid("constants", "k1..k5 must be strictly positive");
  if (k.f_fund != 50.0 && k.f_fund != 60.0) invalid("constants", "f_fund must be 50 or 60 Hz");

  for (const auto& m : cat.materials) {
    if (!(m.rho > 0)) invalid("material " + m.name, "rho must be positive");
    if (!(m.alpha > 0 && m.alpha < 0.01)) invalid("material " + m.name, "alpha must lie in (0, 0.01)");
  }

  for (const auto& s : cat.strand_classes) {
    const std::string who = "strand class N=" + std::to_string(s.N);
    if (s.N != 7 && s.N != 19 && s.N != 48) invalid(who, "N must be 7, 19 or 48");
    if (!(s.K_gmr > 1)) invalid(who, "K_gmr must exceed 1");
    if (s.K_r && !(*s.K_r > 1)) invalid(who, "K_r must exceed 1");
    if (!s.K_r && s.N != 48) invalid(who, "K_r may be absent only for N=48");
  }

  for (const auto& c : cat.configs) {
    const std::string who = "config " + c.name;
    if (c.n_cond < 2 || c.n_cond > 4) invalid(who, "n_cond must be 2, 3 or 4");
    if (conductor_count(c.family) != c.n_cond) invalid(who, "family conductor count does not match n_cond");
    if (c.theta_deg.has_value() != (c.family == Family::OhTriangular))
      invalid(who, "theta must be present exactly for the triangular family");
    if (c.theta_deg && !(*c.theta_deg > 0 && *c.theta_deg < 90)) invalid(who, "theta must lie in (0, 90) degrees");
    if (kind_of(c.family) != c.kind) invalid(who, "kind does not match family");
  }

  for (const auto& e : cat.conductors) {
    const std::string who = "conductor " + e.code;
    cat.material(e.material);
    const StrandClass& s = cat.strand(e.N);
    if (!(e.r_std > 0 && e.area_std > 0)) invalid(who, "area_std and r_std must be positive");
    if (s.K_r) {
      const double area = e.N * 3.14159265358979323846 * e.r_std * e.r_std;
      if (std::abs(area - e.area_std) / e.area_std > 0.01) invalid(who, "area_std differs from N*pi*r_std^2 by over 1%");
    }
    if ((e.kind == LineKind::Cable) != e.t_nom_std.has_value()) invalid(who, "t_nom_std is required for cables only");
  }

  const auto& b = cat.bounds;
  check_range("r", b.r_min, b.r_max);
  check_range("A", b.A_min, b.A_max);
  check_range("A_sector", b.A_min_sector, b.A_max_sector);
  check_range("T", b.T_min, b.T_max);
  check_range("t_nom", b.t_nom_min, b.t_nom_max);
  check_range("u_cable", b.u_min_cable, b.u_max_cable);
  check_range("v_ref_OH", b.v_ref_min_OH, b.v_ref_max_OH);
  check_range("v_ref_cable", b.v_ref_min_cable, b.v_ref_max_cable);
  if (!(b.D_min_OH > 0)) invalid("bounds", "D_min_OH must be positive");
  if (!(b.u_max_OH > b.D_min_OH / 2)) invalid("bounds", "u_max_OH must exceed D_min_OH/2");

  for (const auto& g : cat.standard_geometries) cat.config(g.config);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

std::string serialize_catalog(const Catalog& cat) {
  json doc;
  const auto& k = cat.constants;
  doc["constants"] = {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"k4", k.k4}, {"k5", k.k5}, {"f_fund", k.f_fund}};
  doc["materials"] = json::array();
  for (const auto& m : cat.materials) doc["materials"].push_back({{"name", m.name}, {"rho", m.rho}, {"alpha", m.alpha}});
  doc["strand_classes"] = json::array();
  for (const auto& s : cat.strand_classes)
    doc["strand_classes"].push_back({{"N", s.N}, {"K_gmr", s.K_gmr}, {"K_r", opt(s.K_r)}});
  doc["configs"] = json::array();
  for (const auto& c : cat.configs) {
    json j = {{"name", c.name},
              {"family", std::string(to_string(c.family))},
              {"n_cond", c.n_cond},
              {"N", c.strand.N},
              {"kind", std::string(to_string(c.kind))}};
    if (c.theta_deg) j["theta"] = *c.theta_deg;
    doc["configs"].push_back(std::move(j));
  }
  doc["conductors"] = json::array();
  for (const auto& e : cat.conductors)
    doc["conductors"].push_back({{"code", e.code},
                                 {"kind", std::string(to_string(e.kind))},
                                 {"n_cond", e.n_cond},
                                 {"area_std", e.area_std},
                                 {"r_std", e.r_std},
                                 {"N", e.N},
                                 {"material", e.material},
                                 {"t_nom_std", opt(e.t_nom_std)}});
  const auto& b = cat.bounds;
  doc["bounds"] = {{"r_min", b.r_min},
                   {"r_max", b.r_max},
                   {"A_min", b.A_min},
                   {"A_max", b.A_max},
                   {"A_min_sector", b.A_min_sector},
                   {"A_max_sector", b.A_max_sector},
                   {"T_min", b.T_min},
                   {"T_max", b.T_max},
                   {"t_nom_min", b.t_nom_min},
                   {"t_nom_max", b.t_nom_max},
                   {"D_min_OH", b.D_min_OH},
                   {"u_max_OH", b.u_max_OH},
                   {"u_min_cable", b.u_min_cable},
                   {"u_max_cable", b.u_max_cable},
                   {"v_ref_min_OH", b.v_ref_min_OH},
                   {"v_ref_max_OH", b.v_ref_max_OH},
                   {"v_ref_min_cable", b.v_ref_min_cable},
                   {"v_ref_max_cable", b.v_ref_max_cable}};
  doc["standard_geometries"] = json::array();
  for (const auto& g : cat.standard_geometries) {
    json j = {{"config", g.config}};
    if (g.u1) j["u1"] = *g.u1;
    if (g.u2) j["u2"] = *g.u2;
    if (g.v1) j["v1"] = *g.v1;
    if (g.v_ref) j["v_ref"] = *g.v_ref;
    doc["standard_geometries"].push_back(std::move(j));
  }
  return doc.dump(2);
}

std::string_view default_catalog_text() { return default_catalog_text_impl(); }

const Catalog& default_catalog() {
  static const Catalog cat = parse_catalog(default_catalog_text(), "<bundled catalog>");
  return cat;
}

std::vector<Combination> candidate_combinations(LineKind kind, const Catalog& cat) {
  std::vector<Combination> out;
  for (const auto& c : cat.configs) {
    if (c.kind != kind || c.n_cond == 2) continue;
    for (const auto& m : cat.materials) {
      // Overhead lines in the bundled standards are aluminium only.
      if (kind == LineKind::Overhead) {
        const bool used = std::any_of(cat.conductors.begin(), cat.conductors.end(), [&](const auto& e) {
          return e.kind == LineKind::Overhead && e.material == m.name;
        });
        if (!used) continue;
      }
      out.push_back({c, m});
    }
  }
  return out;
}

} // namespace invcarson
