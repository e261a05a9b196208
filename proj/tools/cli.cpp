#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "invcarson/study.hpp"

namespace invcarson::cli {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

// Reports carry 6 significant digits. Rounding happens once, when the value
// enters the document, so JSON and CSV print the same numbers.
json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string str(std::string_view s) { return std::string(s); }

// ---------------------------------------------------------------------------
// Reference file

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return cells;
}

double parse_number(const std::string& field, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::Schema, field + ": not a number: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& field, std::string text) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (text == "1" || text == "true" || text == "yes" || text == "y") return true;
  if (text == "0" || text == "false" || text == "no" || text == "n") return false;
  throw Error(ErrorKind::Schema, field + ": not a boolean: '" + text + "'");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

} // namespace

std::vector<ParsedRecord> parse_reference_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Schema, "reference file is empty");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"line_id", "kind", "r00", "x00", "r11", "x11"})
    if (!col.count(need)) throw Error(ErrorKind::Schema, std::string("reference file lacks column '") + need + "'");

  std::vector<ParsedRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    auto cell = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      return it != col.end() && it->second < cells.size() ? cells[it->second] : std::string();
    };
    ParsedRecord pr;
    pr.line_id = cell("line_id");
    if (pr.line_id.empty()) pr.line_id = "line " + std::to_string(lineno);
    try {
      ReferenceRecord rec;
      rec.line_id = pr.line_id;
      rec.ref.kind = line_kind_from_string(cell("kind"));
      auto opt_num = [&](const char* name) -> std::optional<double> {
        const auto s = cell(name);
        if (s.empty()) return std::nullopt;
        return parse_number(name, s);
      };
      rec.ref.R00 = opt_num("r00");
      rec.ref.X00 = opt_num("x00");
      const auto r11 = opt_num("r11"), x11 = opt_num("x11");
      if (!r11 || !x11) throw Error(ErrorKind::Schema, "r11 and x11 are required");
      rec.ref.R11 = *r11;
      rec.ref.X11 = *x11;
      rec.ref.B00 = opt_num("b00");
      rec.ref.B11 = opt_num("b11");
      if (rec.ref.B00.has_value() != rec.ref.B11.has_value())
        throw Error(ErrorKind::Schema, "b00 and b11 must be given together");
      if (rec.ref.R00.has_value() != rec.ref.X00.has_value())
        throw Error(ErrorKind::Schema, "r00 and x00 must be given together");
      rec.ref.check();
      rec.temperature = opt_num("temp_known");
      if (const auto s = cell("buried"); !s.empty()) rec.buried = parse_bool("buried", s);
      if (const auto n = opt_num("n_cond")) {
        if (*n != 3 && *n != 4) throw Error(ErrorKind::Schema, "n_cond must be 3 or 4");
        rec.n_cond = static_cast<int>(*n);
      }
      pr.record = std::move(rec);
    } catch (const Error& e) {
      pr.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    out.push_back(std::move(pr));
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Report pieces

json seq_json(const SequenceComponents& s) {
  json j{{"R00", num(s.R00)}, {"X00", num(s.X00)}, {"R11", num(s.R11)}, {"X11", num(s.X11)}};
  if (s.has_shunt()) {
    j["B00"] = num(*s.B00);
    j["B11"] = num(*s.B11);
  }
  return j;
}

json matrix_json(const ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json rr = json::array(), ii = json::array();
    for (int k = 0; k < m.dim(); ++k) {
      rr.push_back(num(m(i, k).real()));
      ii.push_back(num(m(i, k).imag()));
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"unit", str(to_string(m.unit))}, {"re", re}, {"im", im}};
}

json chain_json(const ImpedanceSet& s) {
  json j{{"conductor",
          {{"r", num(s.conductor.r)},
           {"A", num(s.conductor.A)},
           {"T", num(s.conductor.T)},
           {"R_dc", num(s.conductor.R_dc)},
           {"R_ac", num(s.conductor.R_ac)},
           {"GMR", num(s.conductor.GMR)},
           {"R", num(s.conductor.R)},
           {"R_nom", num(s.conductor.R_nom)}}},
         {"Z_carson", matrix_json(s.Z_carson)},
         {"Z_kron", matrix_json(s.Z_kron)},
         {"Z_012", matrix_json(s.Z_012)}};
  json x = json::array(), y = json::array();
  for (double v : s.coords.x) x.push_back(num(v));
  for (double v : s.coords.y) y.push_back(num(v));
  j["coordinates"] = {{"x", x}, {"y", y}};
  if (s.P) j["P"] = matrix_json(*s.P);
  if (s.C) j["C"] = matrix_json(*s.C);
  if (s.Y) j["Y"] = matrix_json(*s.Y);
  if (s.Y_012) j["Y_012"] = matrix_json(*s.Y_012);
  return j;
}

json variables_json(const std::vector<VariableValue>& vars) {
  json j = json::object();
  for (const auto& v : vars) j[str(to_string(v.var))] = num(v.value);
  return j;
}

json feasibility_json(const FeasibilityResult& r) {
  return {{"config", r.combination.config.name},
          {"material", r.combination.material.name},
          {"z_diff", num(r.z_diff)},
          {"status", str(to_string(r.status))},
          {"starts", r.starts},
          {"converged", r.converged},
          {"variables", variables_json(r.variables)},
          {"fitted", seq_json(r.fitted)}};
}

json ranges_json(const std::vector<BoundEntry>& entries) {
  json j = json::object();
  for (const auto& e : entries)
    j[str(to_string(e.var))] = {{"min", num(e.min)}, {"max", num(e.max)}, {"gap", num(e.gap())}};
  return j;
}

json error_json(const std::string& line_id, const std::string& message) {
  return {{"line_id", line_id}, {"error", message}};
}

std::string error_text(const std::exception& e) {
  if (const auto* ie = dynamic_cast<const Error*>(&e)) return std::string(to_string(ie->kind())) + ": " + e.what();
  return e.what();
}

// ---------------------------------------------------------------------------
// Output

void flatten(const json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "/" + it.key(), rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "/" + std::to_string(i), rows);
  } else if (j.is_string()) {
    rows.emplace_back(path, csv_quote(j.get<std::string>()));
  } else {
    rows.emplace_back(path, j.dump());
  }
}

// Arrays of flat objects become tables; anything else becomes path,value rows.
void write_csv(const json& doc, std::ostream& out) {
  const json* table = nullptr;
  if (doc.contains("rows") && doc["rows"].is_array()) table = &doc["rows"];
  if (table) {
    std::vector<std::string> cols;
    for (const auto& row : *table)
      for (auto it = row.begin(); it != row.end(); ++it)
        if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << "\n";
    for (const auto& row : *table) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << ",";
        if (!row.contains(cols[c])) continue;
        const auto& v = row[cols[c]];
        out << (v.is_string() ? csv_quote(v.get<std::string>()) : v.dump());
      }
      out << "\n";
    }
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc, "", rows);
  out << "path,value\n";
  for (const auto& [p, v] : rows) out << csv_quote(p) << "," << v << "\n";
}

struct Common {
  std::string catalog_path;
  std::string output;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  int starts = 16;
  int workers = 0;
};

void emit(const json& doc, const Common& c, std::ostream& out) {
  std::ofstream file;
  std::ostream* os = &out;
  if (!c.output.empty() && c.output != "-") {
    file.open(c.output);
    if (!file) throw Error(ErrorKind::Contract, "cannot write " + c.output);
    os = &file;
  }
  if (c.format == "csv") write_csv(doc, *os);
  else *os << doc.dump(2) << "\n";
}

json header(const std::string& command, const SolverOptions* solver) {
  json j{{"schema_version", kSchemaVersion}, {"command", command}};
  if (solver) {
    j["seed"] = solver->seed;
    j["starts"] = solver->starts;
  }
  return j;
}

std::vector<ParsedRecord> read_records(const std::string& path) {
  if (path == "-") return parse_reference_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Schema, "cannot open reference file " + path);
  return parse_reference_csv(in);
}

RecoverOptions recover_options(const ReferenceRecord& rec, const SolverOptions& solver) {
  RecoverOptions ro;
  ro.solver = solver;
  ro.n_cond = rec.n_cond;
  ro.buried = rec.buried;
  ro.model.known_temperature = rec.temperature;
  return ro;
}

std::optional<Combination> chosen_combination(const Catalog& catalog, const std::string& config,
                                              const std::string& material) {
  if (config.empty() && material.empty()) return std::nullopt;
  if (config.empty() || material.empty()) throw Error(ErrorKind::Contract, "--config and --material go together");
  return Combination{catalog.config(config), catalog.material(material)};
}

// Runs fn for each parsed record, recording failures in place.
json for_records(const std::vector<ParsedRecord>& records,
                 const std::function<json(const ReferenceRecord&)>& fn) {
  json out = json::array();
  for (const auto& pr : records) {
    if (!pr.record) {
      out.push_back(error_json(pr.line_id, pr.error));
      continue;
    }
    try {
      json j = fn(*pr.record);
      j["line_id"] = pr.line_id;
      j["kind"] = str(to_string(pr.record->ref.kind));
      out.push_back(std::move(j));
    } catch (const std::exception& e) {
      out.push_back(error_json(pr.line_id, error_text(e)));
    }
  }
  return out;
}

json validation_json(const ValidationReport& rep, bool with_ranking) {
  json flags = json::array();
  for (auto f : rep.flags) flags.push_back(str(to_string(f)));
  json cands = json::array();
  for (const auto& c : rep.candidates) {
    json cj{{"candidate", c.candidate},
            {"config", c.combination.config.name},
            {"material", c.combination.material.name},
            {"z_diff", num(c.z_diff)},
            {"eliminated", c.eliminated},
            {"variable", str(to_string(c.var))},
            {"standard", num(c.standard)}};
    if (!c.eliminated) {
      cj["recovered"] = num(c.recovered);
      cj["percent"] = num(c.percent);
    }
    cands.push_back(std::move(cj));
  }
  json j{{"flags", flags},
         {"min_zdiff_full", num(rep.min_zdiff_full)},
         {"zero_sequence_dropped", rep.zero_sequence_dropped},
         {"candidates", cands}};
  j["best"] = rep.best ? json(*rep.best) : json(nullptr);
  if (with_ranking) {
    json ranking = json::array();
    for (const auto& r : rep.ranking) ranking.push_back(feasibility_json(r));
    j["ranking"] = ranking;
  }
  return j;
}

Grid parse_grid(const std::string& text) {
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw Error(ErrorKind::Contract, "grid must be MIN:MAX:STEP, got '" + text + "'");
  return {parse_number("grid", a), parse_number("grid", b), parse_number("grid", c)};
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward and inverse Carson line-parameter calculations", "invcarson"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  if (const char* env = std::getenv("INVCARSON_CATALOG")) common.catalog_path = env;
  std::string env_seed;
  if (const char* env = std::getenv("INVCARSON_SEED")) env_seed = env;

  auto add_common = [&](CLI::App* sub, bool solver) {
    sub->add_option("--catalog", common.catalog_path, "Catalog JSON (default: bundled; env INVCARSON_CATALOG)");
    sub->add_option("-o,--output", common.output, "Output file (default: stdout)");
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    if (solver) {
      sub->add_option("--seed", common.seed, "Multi-start seed (env INVCARSON_SEED)");
      sub->add_option("--starts", common.starts, "Multi-start count")->check(CLI::PositiveNumber);
      sub->add_option("--workers", common.workers, "Worker threads (default: available cores)")
          ->check(CLI::NonNegativeNumber);
    }
  };

  // forward
  auto* fwd = app.add_subcommand("forward", "Sequence components of one line");
  add_common(fwd, false);
  std::string f_config, f_conductor, f_material;
  std::optional<double> f_area, f_radius, f_tnom, f_u1, f_u2, f_v1, f_vref;
  double f_temp = 20.0;
  bool f_no_shunt = false, f_matrices = false, f_no_bounds = false;
  fwd->add_option("--config", f_config, "Configuration name")->required();
  fwd->add_option("--conductor", f_conductor, "Catalog conductor code (radius, material, insulation)");
  fwd->add_option("--material", f_material, "Material name");
  fwd->add_option("--area", f_area, "Conductor area [mm2]");
  fwd->add_option("--radius", f_radius, "Strand radius [mm]");
  fwd->add_option("--temp", f_temp, "Conductor temperature [degC]");
  fwd->add_option("--tnom", f_tnom, "Insulation thickness [mm]");
  fwd->add_option("--u1", f_u1, "Geometry u1 [mm]");
  fwd->add_option("--u2", f_u2, "Geometry u2 [mm]");
  fwd->add_option("--v1", f_v1, "Geometry v1 [mm]");
  fwd->add_option("--vref", f_vref, "Reference height [mm]");
  fwd->add_flag("--no-shunt", f_no_shunt, "Series impedance only");
  fwd->add_flag("--no-bounds", f_no_bounds, "Skip the catalog bound check");
  fwd->add_flag("--emit-matrices", f_matrices, "Include every matrix of the chain");

  // recover / validate
  auto* rec = app.add_subcommand("recover", "Rank candidate combinations for each reference record");
  add_common(rec, true);
  std::string input;
  rec->add_option("-i,--input", input, "Reference CSV ('-' for stdin)")->required();
  auto* val = app.add_subcommand("validate", "Screen reference records and report % mismatch to standards");
  add_common(val, true);
  val->add_option("-i,--input", input, "Reference CSV ('-' for stdin)")->required();

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Tighten variable bounds at the recovered sequence values");
  add_common(bnd, true);
  std::string c_config, c_material;
  bnd->add_option("-i,--input", input, "Reference CSV ('-' for stdin)")->required();
  bnd->add_option("--config", c_config, "Combination configuration (default: best recovered)");
  bnd->add_option("--material", c_material, "Combination material");

  // slack
  auto* slk = app.add_subcommand("slack", "Feasibility and variable ranges under a slack band");
  add_common(slk, true);
  std::vector<double> betas{0.05};
  std::vector<std::string> var_names;
  slk->add_option("-i,--input", input, "Reference CSV ('-' for stdin)")->required();
  slk->add_option("--config", c_config, "Combination configuration (default: every candidate)");
  slk->add_option("--material", c_material, "Combination material");
  slk->add_option("--beta", betas, "Slack fractions")->check(CLI::NonNegativeNumber)->delimiter(',');
  slk->add_option("--vars", var_names, "Variables to range (default: all)")->delimiter(',');

  // sweep
  auto* swp = app.add_subcommand("sweep", "Mismatch sweep over forward samples");
  add_common(swp, true);
  std::string s_kind = "overhead", s_area, s_sector, s_temp, s_aggregate = "none";
  std::vector<std::string> s_configs, s_materials;
  std::optional<double> s_tnom;
  std::vector<double> s_betas;
  swp->add_option("--kind", s_kind, "Line kind")->check(CLI::IsMember({"overhead", "cable"}));
  swp->add_option("--area", s_area, "Area grid MIN:MAX:STEP [mm2]");
  swp->add_option("--sector-area", s_sector, "Sector area grid MIN:MAX:STEP [mm2]");
  swp->add_option("--temp", s_temp, "Temperature grid MIN:MAX:STEP [degC]");
  swp->add_option("--forward-config", s_configs, "Forward configurations (default: every candidate)")->delimiter(',');
  swp->add_option("--material", s_materials, "Forward materials")->delimiter(',');
  swp->add_option("--tnom", s_tnom, "Insulation of forward cable samples [mm]");
  swp->add_option("--beta", s_betas, "Slack fractions")->check(CLI::NonNegativeNumber)->delimiter(',');
  swp->add_option("--aggregate", s_aggregate, "Report rows or aggregates")
      ->check(CLI::IsMember({"none", "configuration", "property"}));

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return 1;
  }

  try {
    const Catalog catalog = common.catalog_path.empty() ? default_catalog() : load_catalog(common.catalog_path);
    SolverOptions solver;
    if (!env_seed.empty()) solver.seed = static_cast<std::uint64_t>(parse_number("INVCARSON_SEED", env_seed));
    if (common.seed) solver.seed = *common.seed;
    solver.starts = common.starts;
    solver.workers = common.workers > 0 ? common.workers : default_workers();

    if (fwd->parsed()) {
      const auto& config = catalog.config(f_config);
      LineInput in;
      std::string material = f_material;
      if (!f_conductor.empty()) {
        const auto& e = catalog.conductor(f_conductor);
        in = standard_line_input(catalog, config, e, f_temp);
        if (material.empty()) material = e.material;
      } else {
        const auto* sg = catalog.standard_geometry(config.name);
        if (!sg) throw Error(ErrorKind::Contract, "no standard geometry for " + config.name);
        in.T = f_temp;
        in.geometry = {sg->u1, sg->u2, sg->v1, sg->v_ref};
        if (config.is_cable() && !config.is_sector()) in.geometry.u1.reset();
      }
      if (material.empty()) throw Error(ErrorKind::Contract, "give --conductor or --material");
      if (f_radius) in.r = *f_radius;
      if (f_area) in.r = radius_for_area(config.strand.N, *f_area);
      if (in.r <= 0) throw Error(ErrorKind::Contract, "give --conductor, --area or --radius");
      if (f_tnom) in.t_nom = *f_tnom;
      if (f_u1) in.geometry.u1 = *f_u1;
      if (f_u2) in.geometry.u2 = *f_u2;
      if (f_v1) in.geometry.v1 = *f_v1;
      if (f_vref) in.geometry.v_ref = *f_vref;
      ForwardOptions fo;
      fo.include_shunt = !f_no_shunt && !config.is_sector();
      fo.bounds = f_no_bounds ? nullptr : &catalog.bounds;
      const auto set = forward_chain(config, catalog.material(material), in, fo);
      json doc = header("forward", nullptr);
      doc["config"] = config.name;
      doc["material"] = material;
      doc["input"] = {{"r", num(in.r)}, {"T", num(in.T)}};
      if (config.is_cable()) doc["input"]["t_nom"] = num(in.t_nom);
      if (in.geometry.u1) doc["input"]["u1"] = num(*in.geometry.u1);
      if (in.geometry.u2) doc["input"]["u2"] = num(*in.geometry.u2);
      if (in.geometry.v1) doc["input"]["v1"] = num(*in.geometry.v1);
      if (in.geometry.v_ref) doc["input"]["v_ref"] = num(*in.geometry.v_ref);
      doc["sequence"] = seq_json(set.seq);
      if (f_matrices) doc["chain"] = chain_json(set);
      emit(doc, common, out);
      return 0;
    }

    if (rec->parsed() || val->parsed()) {
      const bool full = rec->parsed();
      const auto records = read_records(input);
      json doc = header(full ? "recover" : "validate", &solver);
      doc["records"] = for_records(records, [&](const ReferenceRecord& r) {
        ValidationOptions vo;
        vo.recover = recover_options(r, solver);
        return validation_json(validate_record(r.ref, catalog, vo), full);
      });
      emit(doc, common, out);
      return 0;
    }

    if (bnd->parsed()) {
      const auto chosen = chosen_combination(catalog, c_config, c_material);
      const auto records = read_records(input);
      json doc = header("bounds", &solver);
      doc["records"] = for_records(records, [&](const ReferenceRecord& r) {
        const auto ro = recover_options(r, solver);
        const FeasibilityResult fr =
            chosen ? feasibility(catalog, *chosen, r.ref, solver, ro.model) : recover(r.ref, catalog, ro).front();
        const auto rep = tighten_bounds(catalog, fr.combination, fr.fitted, solver, ro.model, fr.x);
        json j = feasibility_json(fr);
        j["ranges"] = ranges_json(rep.entries);
        return j;
      });
      emit(doc, common, out);
      return 0;
    }

    if (slk->parsed()) {
      const auto chosen = chosen_combination(catalog, c_config, c_material);
      std::vector<ModelVar> vars;
      for (const auto& v : var_names) vars.push_back(model_var_from_string(v));
      const auto records = read_records(input);
      json doc = header("slack", &solver);
      doc["records"] = for_records(records, [&](const ReferenceRecord& r) {
        const auto ro = recover_options(r, solver);
        std::vector<Combination> combos;
        if (chosen) combos.push_back(*chosen);
        else combos = recovery_candidates(catalog, r.ref.kind, ro);
        if (r.ref.has_shunt())
          std::erase_if(combos, [](const Combination& c) { return c.config.is_sector(); });
        json list = json::array();
        for (const auto& c : combos)
          for (double b : betas) {
            // Variables the combination lacks are skipped.
            std::vector<ModelVar> mine;
            if (!vars.empty()) {
              const InverseModel probe(catalog, c, r.ref, {Mode::MinDeviation, Objective::MaxDeviation, {}, 0.0},
                                       ro.model);
              const auto phi = probe.phi();
              for (auto v : vars)
                if (std::find(phi.begin(), phi.end(), v) != phi.end()) mine.push_back(v);
              if (mine.empty()) continue;
            }
            const auto s = slack_analysis(catalog, c, r.ref, b, mine, solver, ro.model);
            json sj{{"config", c.config.name},
                    {"material", c.material.name},
                    {"beta", num(b)},
                    {"feasible", s.feasible},
                    {"min_deviation", num(s.min_deviation)}};
            if (s.feasible) sj["ranges"] = ranges_json(s.ranges);
            list.push_back(std::move(sj));
          }
        return json{{"results", list}};
      });
      emit(doc, common, out);
      return 0;
    }

    if (swp->parsed()) {
      SweepSpec spec = s_kind == "cable" ? cable_sweep_spec() : overhead_sweep_spec();
      if (!s_area.empty()) spec.area = parse_grid(s_area);
      if (!s_sector.empty()) spec.sector_area = parse_grid(s_sector);
      if (!s_temp.empty()) spec.temperature = parse_grid(s_temp);
      if (!s_configs.empty()) spec.forward_configs = s_configs;
      if (!s_materials.empty()) spec.materials = s_materials;
      if (s_tnom) spec.t_nom = *s_tnom;
      if (!s_betas.empty()) spec.betas = s_betas;
      for (const auto& g : {spec.area, spec.sector_area, spec.temperature})
        if (g.min > g.max) throw Error(ErrorKind::Contract, "sweep grid is empty");
      const auto& b = catalog.bounds;
      if (spec.temperature.min < b.T_min || spec.temperature.max > b.T_max)
        throw Error(ErrorKind::BoundViolation, "temperature grid outside the catalog bounds");
      if (spec.area.min < b.A_min || spec.area.max > b.A_max)
        throw Error(ErrorKind::BoundViolation, "area grid outside the catalog bounds");
      if (s_kind == "cable" && (spec.sector_area.min < b.A_min_sector || spec.sector_area.max > b.A_max_sector))
        throw Error(ErrorKind::BoundViolation, "sector area grid outside the catalog bounds");

      const auto rep = mismatch_sweep(catalog, spec, solver);
      json doc = header("sweep", &solver);
      doc["points"] = rep.points.size();
      doc["skipped"] = rep.skipped;
      json rows = json::array();
      if (s_aggregate == "none") {
        for (const auto& row : rep.rows) {
          const auto& p = rep.points[row.point];
          const auto& c = rep.candidates[row.candidate];
          const auto m = rep.match_of(row);
          for (std::size_t k = 0; k < spec.betas.size(); ++k)
            rows.push_back({{"forward_config", p.forward.config.name},
                            {"forward_material", p.forward.material.name},
                            {"area", num(p.area)},
                            {"T", num(p.T)},
                            {"r", num(p.r)},
                            {"candidate_config", c.config.name},
                            {"candidate_material", c.material.name},
                            {"match", m.label()},
                            {"beta", num(spec.betas[k])},
                            {"z_diff", num(row.z_diff)},
                            {"min_deviation", num(row.min_deviation)},
                            {"feasible", static_cast<bool>(row.feasible[k])}});
        }
      } else {
        const auto agg = s_aggregate == "configuration" ? rep.by_configuration() : rep.by_property_match();
        for (const auto& a : agg)
          for (std::size_t k = 0; k < spec.betas.size(); ++k)
            rows.push_back({{"key", a.key},
                            {"count", a.count},
                            {"z_min", num(a.z_min)},
                            {"z_mean", num(a.z_mean)},
                            {"z_max", num(a.z_max)},
                            {"beta", num(spec.betas[k])},
                            {"feasible_percent", num(a.feasible_percent[k])}});
      }
      doc["rows"] = rows;
      emit(doc, common, out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << error_text(e) << "\n";
    return 2;
  }
  return 1;
}

} // namespace invcarson::cli
