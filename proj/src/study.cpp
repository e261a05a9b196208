#include "invcarson/study.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "invcarson/error.hpp"

namespace invcarson {

std::vector<double> Grid::values() const {
  if (!(step > 0)) fail(ErrorKind::Contract, "grid step must be positive");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = min + i * step;
    if (v > max + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

SweepSpec overhead_sweep_spec() {
  SweepSpec s;
  s.kind = LineKind::Overhead;
  s.area = {15, 240, 5};
  s.temperature = {20, 75, 5};
  return s;
}

SweepSpec cable_sweep_spec() {
  SweepSpec s;
  s.kind = LineKind::Cable;
  s.area = {15, 240, 5};
  s.sector_area = {185, 300, 5};
  s.temperature = {20, 90, 5};
  return s;
}

std::string PropertyMatch::label() const {
  auto yn = [](bool b) { return b ? "Y" : "X"; };
  return std::string("n:") + yn(n_cond) + " N:" + yn(strands) + " m:" + yn(material);
}

PropertyMatch SweepReport::match_of(const SweepRow& row) const {
  const Combination& f = points[row.point].forward;
  const Combination& c = candidates[row.candidate];
  return {f.config.n_cond == c.config.n_cond, f.config.strand.N == c.config.strand.N,
          f.material.name == c.material.name};
}

namespace {

std::vector<SweepAggregate> aggregate(const SweepReport& rep, const std::function<std::string(const SweepRow&)>& key) {
  std::map<std::string, std::vector<const SweepRow*>> groups;
  std::vector<std::string> order;
  for (const auto& row : rep.rows) {
    const std::string k = key(row);
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&row);
  }
  std::vector<SweepAggregate> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    SweepAggregate a;
    a.key = k;
    a.count = static_cast<int>(g.size());
    a.z_min = g.front()->z_diff;
    a.z_max = g.front()->z_diff;
    a.feasible_percent.assign(rep.spec.betas.size(), 0.0);
    for (const SweepRow* r : g) {
      a.z_min = std::min(a.z_min, r->z_diff);
      a.z_max = std::max(a.z_max, r->z_diff);
      a.z_mean += r->z_diff / a.count;
      for (std::size_t b = 0; b < r->feasible.size(); ++b)
        if (r->feasible[b]) a.feasible_percent[b] += 100.0 / a.count;
    }
    out.push_back(std::move(a));
  }
  return out;
}

} // namespace

std::vector<SweepAggregate> SweepReport::by_configuration() const {
  return aggregate(*this, [&](const SweepRow& r) {
    return points[r.point].forward.name() + " -> " + candidates[r.candidate].name();
  });
}

std::vector<SweepAggregate> SweepReport::by_property_match() const {
  return aggregate(*this, [&](const SweepRow& r) { return match_of(r).label(); });
}

SweepReport mismatch_sweep(const Catalog& catalog, const SweepSpec& spec, const SolverOptions& solver) {
  SweepReport rep;
  rep.spec = spec;
  rep.candidates = spec.candidates.empty() ? candidate_combinations(spec.kind, catalog) : spec.candidates;
  for (double b : spec.betas)
    if (!(b >= 0)) fail(ErrorKind::Domain, "slack beta must be nonnegative");

  std::vector<Combination> forward;
  if (spec.forward_configs.empty() && spec.materials.empty()) {
    forward = candidate_combinations(spec.kind, catalog);
  } else {
    std::vector<std::string> cfgs = spec.forward_configs, mats = spec.materials;
    const auto all = candidate_combinations(spec.kind, catalog);
    for (const auto& c : all) {
      if (spec.forward_configs.empty() && std::find(cfgs.begin(), cfgs.end(), c.config.name) == cfgs.end())
        cfgs.push_back(c.config.name);
      if (spec.materials.empty() && std::find(mats.begin(), mats.end(), c.material.name) == mats.end())
        mats.push_back(c.material.name);
    }
    for (const auto& cn : cfgs)
      for (const auto& mn : mats) {
        const ConfigSpec& cfg = catalog.config(cn);
        if (cfg.kind != spec.kind) fail(ErrorKind::Contract, "configuration " + cn + " is not of the sweep kind");
        forward.push_back({cfg, catalog.material(mn)});
      }
  }

  const BoundSet& b = catalog.bounds;
  for (const auto& fc : forward) {
    const Grid& ag = fc.config.is_sector() ? spec.sector_area : spec.area;
    const StandardGeometry* sg = catalog.standard_geometry(fc.config.name);
    if (!sg) fail(ErrorKind::Contract, "no standard geometry for " + fc.config.name);
    for (double A : ag.values()) {
      const double r = radius_for_area(fc.config.strand.N, A);
      if (r < b.r_min - 1e-12 || r > b.r_max + 1e-12) {
        rep.skipped += static_cast<int>(spec.temperature.values().size());
        continue;
      }
      for (double T : spec.temperature.values()) {
        LineInput in;
        in.r = r;
        in.T = T;
        in.geometry.u1 = sg->u1;
        in.geometry.u2 = sg->u2;
        in.geometry.v1 = sg->v1;
        in.geometry.v_ref = sg->v_ref;
        if (fc.config.is_cable() && !fc.config.is_sector()) {
          in.t_nom = spec.t_nom;
          in.geometry.u1.reset();
        }
        ForwardOptions fo;
        fo.include_shunt = false;
        rep.points.push_back({fc, A, T, r, forward_pipeline(fc.config, fc.material, in, fo)});
      }
    }
  }
  if (rep.points.empty()) fail(ErrorKind::Contract, "sweep grid is empty");

  const int nc = static_cast<int>(rep.candidates.size());
  const int total = static_cast<int>(rep.points.size()) * nc;
  SolverOptions inner = solver;
  inner.workers = 1;
  rep.rows = parallel_map<SweepRow>(total, solver.workers, [&](int i) {
    SweepRow row;
    row.point = i / nc;
    row.candidate = i % nc;
    const SweepPoint& p = rep.points[row.point];
    const SequenceReference ref = SequenceReference::from(p.seq, spec.kind);
    const Combination& cand = rep.candidates[row.candidate];
    row.z_diff = feasibility(catalog, cand, ref, inner).z_diff;
    row.min_deviation = min_band(catalog, cand, ref, inner).deviation;
    for (double beta : spec.betas) row.feasible.push_back(row.min_deviation <= beta + inner.feasibility_cutoff);
    return row;
  });
  return rep;
}

// ---------------------------------------------------------------------------

const ConfigSpec& config_for(const Catalog& catalog, const ConductorCatalogEntry& entry, int n_cond) {
  if (entry.kind != LineKind::Cable)
    fail(ErrorKind::Contract, "overhead conductor " + entry.code + " fits several configurations");
  for (const auto& c : catalog.configs)
    if (c.kind == LineKind::Cable && c.n_cond == n_cond && c.strand.N == entry.N) return c;
  fail(ErrorKind::Contract, "no " + std::to_string(n_cond) + "-core configuration for " + entry.code);
}

MismatchMatrix standard_mismatch_matrix(const Catalog& catalog, const std::vector<std::string>& codes, int n_cond,
                                        double T, double beta, const SolverOptions& solver) {
  MismatchMatrix mm;
  mm.codes = codes;
  mm.T = T;
  mm.beta = beta;
  const int n = static_cast<int>(codes.size());
  std::vector<SequenceReference> refs;
  for (const auto& code : codes) {
    const ConductorCatalogEntry& e = catalog.conductor(code);
    const ConfigSpec& cfg = config_for(catalog, e, n_cond);
    ForwardOptions fo;
    fo.include_shunt = false;
    refs.push_back(SequenceReference::from(
        forward_pipeline(cfg, catalog.material(e.material), standard_line_input(catalog, cfg, e, T), fo), e.kind));
  }
  SolverOptions inner = solver;
  inner.workers = 1;
  const auto cells = parallel_map<MismatchCell>(n * n, solver.workers, [&](int k) {
    const ConductorCatalogEntry& inv = catalog.conductor(codes[k % n]);
    const Combination comb{config_for(catalog, inv, n_cond), catalog.material(inv.material)};
    const SlackResult s = slack_analysis(catalog, comb, refs[k / n], beta, {ModelVar::R}, inner);
    MismatchCell c;
    c.feasible = s.feasible;
    if (s.feasible) {
      c.r_min = s.ranges.front().min;
      c.r_max = s.ranges.front().max;
      c.flagged = inv.r_std >= c.r_min - 1e-6 && inv.r_std <= c.r_max + 1e-6;
    }
    return c;
  });
  mm.cells.assign(n, std::vector<MismatchCell>(n));
  for (int k = 0; k < n * n; ++k) mm.cells[k / n][k % n] = cells[k];
  return mm;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ValidationFlag f) {
  switch (f) {
  case ValidationFlag::FabricatedZeroSequence: return "fabricated zero-sequence pattern";
  case ValidationFlag::NoCombinationExplains: return "no combination explains data";
  }
  return "?";
}

bool fabricated_zero_sequence(const SequenceReference& ref, double tol) {
  if (!ref.has_zero_sequence()) return false;
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::abs(b); };
  return near(*ref.R00, 4.0 * ref.R11) && near(*ref.X00, ref.X11);
}

ValidationReport validate_record(const SequenceReference& ref, const Catalog& catalog,
                                 const ValidationOptions& options) {
  ref.check();
  ValidationReport rep;
  rep.used = ref;
  if (fabricated_zero_sequence(ref, options.pattern_tolerance))
    rep.flags.push_back(ValidationFlag::FabricatedZeroSequence);

  rep.ranking = recover(ref, catalog, options.recover);
  rep.min_zdiff_full = rep.ranking.front().z_diff;
  if (rep.min_zdiff_full >= options.unexplained_threshold) rep.flags.push_back(ValidationFlag::NoCombinationExplains);

  if (!rep.flags.empty() && ref.has_zero_sequence()) {
    rep.used.R00.reset();
    rep.used.X00.reset();
    rep.zero_sequence_dropped = true;
    rep.ranking = recover(rep.used, catalog, options.recover);
  }

  auto result_for = [&](const Combination& c) -> const FeasibilityResult* {
    for (const auto& r : rep.ranking)
      if (r.combination == c) return &r;
    return nullptr;
  };
  auto var_value = [](const FeasibilityResult& r, ModelVar v) {
    for (const auto& x : r.variables)
      if (x.var == v) return x.value;
    return 0.0;
  };
  auto add = [&](std::string name, const FeasibilityResult& r, ModelVar v, double standard) {
    CandidateMismatch m;
    m.candidate = std::move(name);
    m.combination = r.combination;
    m.z_diff = r.z_diff;
    m.eliminated = r.z_diff > options.match_tolerance;
    m.var = v;
    m.recovered = var_value(r, v);
    m.standard = standard;
    m.percent = 100.0 * std::abs(m.recovered - standard) / standard;
    rep.candidates.push_back(std::move(m));
  };

  if (ref.kind == LineKind::Overhead) {
    for (const auto& c : candidate_combinations(LineKind::Overhead, catalog)) {
      const StandardGeometry* sg = catalog.standard_geometry(c.config.name);
      const FeasibilityResult* r = result_for(c);
      if (r && sg && sg->u1) add(c.config.name, *r, ModelVar::U1, *sg->u1);
    }
  } else {
    for (const auto& e : catalog.conductors) {
      if (e.kind != LineKind::Cable) continue;
      for (int n : e.n_cond) {
        const Combination c{config_for(catalog, e, n), catalog.material(e.material)};
        if (const FeasibilityResult* r = result_for(c)) add(e.code, *r, ModelVar::R, e.r_std);
      }
    }
  }
  const CandidateMismatch* best = nullptr;
  for (const auto& m : rep.candidates)
    if (!m.eliminated && (!best || m.percent < best->percent)) best = &m;
  if (best) rep.best = best->candidate;
  return rep;
}

} // namespace invcarson
