#include "doctest.h"

#include <cmath>
#include <random>

#include "invcarson/error.hpp"
#include "invcarson/inverse.hpp"

using namespace invcarson;

namespace {

const Catalog& cat() { return default_catalog(); }

Combination combo(std::string_view config, std::string_view material = "Al-1350") {
  return {cat().config(config), cat().material(material)};
}

SequenceComponents series_of(std::string_view config, std::string_view code, double T) {
  const auto& c = cat().config(config);
  const auto& e = cat().conductor(code);
  ForwardOptions opt;
  opt.include_shunt = false;
  return forward_pipeline(c, cat().material(e.material), standard_line_input(cat(), c, e, T), opt);
}

SequenceReference oh_ref(std::string_view config, std::string_view code, double T) {
  return SequenceReference::from(series_of(config, code, T), LineKind::Overhead);
}

SequenceReference table_tri_mars() {
  // Mars on the 21.67 degree triangle at 75 degC, series only.
  SequenceReference ref;
  ref.R00 = 0.5952;
  ref.X00 = 1.5873;
  ref.R11 = 0.4472;
  ref.X11 = 0.3692;
  return ref;
}

SolverOptions quick() {
  SolverOptions s;
  s.starts = 8;
  return s;
}

} // namespace

TEST_CASE("zdiff arithmetic") {
  SequenceComponents s{1.0, 0.5, 2.0, 0.4, 3.0, 4.0};
  auto ref = SequenceReference::from(s, LineKind::Cable);
  CHECK(zdiff(s, ref) == 0.0);

  SequenceComponents series{1.0, 0.5, 2.0, 0.4, {}, {}};
  auto sref = SequenceReference::from(series, LineKind::Overhead);
  SequenceComponents off = series;
  off.R00 = 1.06;
  CHECK(zdiff(off, sref) == doctest::Approx(0.015).epsilon(1e-12));

  // six terms with shunt
  SequenceComponents off6 = s;
  off6.B11 = 4.0 * 1.12;
  CHECK(zdiff(off6, ref) == doctest::Approx(0.02).epsilon(1e-12));

  // dropped zero sequence leaves two terms
  sref.R00.reset();
  sref.X00.reset();
  CHECK(zdiff(off, sref) == 0.0);
}

TEST_CASE("zdiff is nonnegative and vanishes only at the reference") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  SequenceComponents base{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
  const auto ref = SequenceReference::from(base, LineKind::Cable);
  for (int i = 0; i < 200; ++i) {
    SequenceComponents s{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    CHECK(zdiff(s, ref) > 0.0);
  }
}

TEST_CASE("nonpositive references are a domain error") {
  SequenceReference ref = table_tri_mars();
  ref.R11 = 0.0;
  CHECK_THROWS_AS(ref.check(), Error);
  try {
    zdiff(SequenceComponents{}, ref);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  SequenceReference neg = table_tri_mars();
  neg.X00 = -1.0;
  CHECK_THROWS_AS(neg.check(), Error);
}

TEST_CASE("degrees of freedom per family") {
  const auto ref = table_tri_mars();
  InverseModel tri(cat(), combo("tri-21.67"), ref, {});
  CHECK(tri.dof() == 3);
  InverseModel hori3(cat(), combo("hori-3w"), ref, {});
  CHECK(hori3.dof() == 3);
  InverseModel hori4(cat(), combo("hori-4w"), ref, {});
  CHECK(hori4.dof() == 4);
  InverseModel nu(cat(), combo("neutral-under"), ref, {});
  CHECK(nu.dof() == 4);

  // known temperature removes T
  ModelOptions mo;
  mo.known_temperature = 75.0;
  InverseModel tri_t(cat(), combo("tri-21.67"), ref, {}, mo);
  CHECK(tri_t.dof() == 2);
}

TEST_CASE("model construction errors") {
  const auto ref = table_tri_mars();
  auto kind_of_error = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Schema;
  };
  // zdiff objective outside feasibility mode
  CHECK(kind_of_error([&] {
          InverseModel m(cat(), combo("tri-21.67"), ref, {Mode::FixedSequence, Objective::ZDiff, {}, 0.0});
        }) == ErrorKind::Contract);
  // min without a target
  CHECK(kind_of_error([&] {
          InverseModel m(cat(), combo("tri-21.67"), ref, {Mode::Slack, Objective::Minimize, {}, 0.05});
        }) == ErrorKind::Contract);
  // overhead reference on a cable combination
  CHECK(kind_of_error([&] { InverseModel m(cat(), combo("cable-4core-7N"), ref, {}); }) == ErrorKind::Contract);

  // shunt data on the sector cable: no packing coefficient
  SequenceComponents s{1.0, 0.3, 0.5, 0.1, 100.0, 200.0};
  const auto cable = SequenceReference::from(s, LineKind::Cable);
  CHECK(kind_of_error([&] { InverseModel m(cat(), combo("cable-4core-48N-sector"), cable, {}); }) ==
        ErrorKind::UnsupportedGeometry);
}

TEST_CASE("slack at zero matches the fixed-sequence model") {
  const auto ref = oh_ref("tri-21.67", "Mars", 75);
  const auto comb = combo("tri-21.67");
  InverseModel slack(cat(), comb, ref, {Mode::Slack, Objective::Minimize, ModelVar::U1, 0.0});
  InverseModel fixed(cat(), comb, ref, {Mode::FixedSequence, Objective::Minimize, ModelVar::U1, 0.0});
  CHECK(slack.dof() == fixed.dof());
  const auto s = solve(slack, quick());
  const auto f = solve(fixed, quick());
  REQUIRE(s.status == SolveStatus::Optimal);
  REQUIRE(f.status == SolveStatus::Optimal);
  CHECK(slack.value(s.x, ModelVar::U1) == doctest::Approx(fixed.value(f.x, ModelVar::U1)).epsilon(1e-5));
}

TEST_CASE("model sequence agrees with the forward pipeline") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& c : candidate_combinations(LineKind::Overhead, cat())) {
    InverseModel m(cat(), c, table_tri_mars(), {});
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd s(m.dof());
      for (int j = 0; j < m.dof(); ++j) s[j] = u(rng);
      const Eigen::VectorXd x = m.start_from(s);
      SequenceComponents model_seq, ref;
      ForwardOptions fo;
      fo.include_shunt = false;
      try {
        model_seq = m.sequence_at(x);
        ref = forward_pipeline(c.config, c.material, m.line_input(x), fo);
      } catch (const Error&) {
        continue; // geometry rows may be violated at a raw sample
      }
      for (auto k : {Component::R00, Component::X00, Component::R11, Component::X11})
        CHECK(std::abs(component_of(model_seq, k) - component_of(ref, k)) <=
              1e-9 * std::max(1.0, std::abs(component_of(ref, k))));
    }
  }
}

TEST_CASE("lifted residuals vanish along the forward chain") {
  for (const auto& e : cat().conductors) {
    std::vector<const ConfigSpec*> configs;
    if (e.kind == LineKind::Overhead) {
      for (const auto& c : cat().configs)
        if (c.kind == LineKind::Overhead && c.n_cond >= 3) configs.push_back(&c);
    } else {
      for (const auto& c : cat().configs)
        if (c.is_cable() && c.strand.N == e.N && std::find(e.n_cond.begin(), e.n_cond.end(), c.n_cond) != e.n_cond.end())
          configs.push_back(&c);
    }
    for (const auto* c : configs) {
      ForwardOptions fo;
      fo.include_shunt = !c->is_sector();
      const auto set = forward_chain(*c, cat().material(e.material), standard_line_input(cat(), *c, e, 45.0), fo);
      for (const auto& r : lifted_residuals(*c, cat().material(e.material), set))
        CHECK_MESSAGE(std::abs(r.value) <= 1e-9, e.code << " " << c->name << " " << r.name << " " << r.value);
    }
  }
}

TEST_CASE("analytic derivatives match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  const auto oh = table_tri_mars();
  SequenceComponents cs{1.2, 0.4, 0.6, 0.09, 150.0, 220.0};
  const auto cable = SequenceReference::from(cs, LineKind::Cable);
  struct Case {
    Combination comb;
    SequenceReference ref;
    ModelSpec spec;
  };
  const std::vector<Case> cases = {
      {combo("tri-21.67"), oh, {}},
      {combo("hori-4w"), oh, {Mode::Slack, Objective::Maximize, ModelVar::U2, 0.03}},
      {combo("neutral-under"), oh, {Mode::FixedSequence, Objective::Minimize, ModelVar::V1, 0.0}},
      {combo("cable-4core-7N", "Cu"), cable, {}},
      {combo("cable-3core-7N"), cable, {Mode::MinDeviation, Objective::MaxDeviation, {}, 0.0}},
  };
  for (const auto& cs_ : cases) {
    InverseModel m(cat(), cs_.comb, cs_.ref, cs_.spec);
    Eigen::VectorXd s(m.dof());
    for (int j = 0; j < m.dof(); ++j) s[j] = u(rng);
    const auto d = check_derivatives(m, m.start_from(s), 1e-6);
    CHECK_MESSAGE(d.max_grad_error <= 1e-4, cs_.comb.name());
    CHECK_MESSAGE(d.max_jac_error <= 1e-4, cs_.comb.name());
    CHECK_MESSAGE(d.max_hess_error <= 1e-4, cs_.comb.name());
  }
}

TEST_CASE("feasibility recovers the triangular Mars line") {
  const auto ref = table_tri_mars();
  const auto fr = feasibility(cat(), combo("tri-21.67"), ref);
  CHECK(fr.status == SolveStatus::Optimal);
  CHECK(fr.z_diff <= 1e-4); // the printed table carries four decimals
  double u1 = 0, r = 0;
  for (const auto& v : fr.variables) {
    if (v.var == ModelVar::U1) u1 = v.value;
    if (v.var == ModelVar::R) r = v.value;
  }
  CHECK(u1 == doctest::Approx(1100).epsilon(0.01));
  CHECK(r == doctest::Approx(1.875).epsilon(0.01));
}

TEST_CASE("epigraph variables equal the absolute deviations at optimum") {
  const auto ref = oh_ref("hori-3w", "Moon", 40);
  const auto comb = combo("hori-4w");
  InverseModel m(cat(), comb, ref, {});
  const auto rec = solve(m, quick());
  REQUIRE(rec.status == SolveStatus::Optimal);
  const auto seq = m.sequence_at(rec.x);
  const auto& comps = m.components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double dev = std::abs(component_of(seq, comps[k]) / *ref.get(comps[k]) - 1.0);
    // within the complementarity tolerance of the solver
    CHECK(std::abs(rec.x[m.dof() + static_cast<int>(k)] - dev) <= 1e-7);
  }
  CHECK(rec.objective == doctest::Approx(zdiff(seq, ref)).epsilon(1e-5));
}

TEST_CASE("recovery ranks matched three-wire combinations first") {
  const auto ref = table_tri_mars();
  RecoverOptions opt;
  opt.solver = quick();
  const auto ranked = recover(ref, cat(), opt);
  REQUIRE(ranked.size() == 5);
  for (int i = 0; i < 3; ++i) {
    CHECK(ranked[i].combination.config.n_cond == 3);
    CHECK(ranked[i].z_diff <= 1e-3);
  }
  for (int i = 3; i < 5; ++i) {
    CHECK(ranked[i].combination.config.n_cond == 4);
    CHECK(ranked[i].z_diff >= 0.06);
    CHECK(ranked[i].z_diff <= 0.15);
  }
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].z_diff <= ranked[i].z_diff);
}

TEST_CASE("recovery breaks ties by conductor count then name") {
  // A zero-sequence-free reference with a 3-wire origin: several candidates
  // fit it exactly, so the ordering among them comes from the tie rules.
  auto ref = oh_ref("hori-3w", "Libra", 30);
  ref.R00.reset();
  ref.X00.reset();
  RecoverOptions opt;
  opt.solver = quick();
  const auto ranked = recover(ref, cat(), opt);
  std::vector<const FeasibilityResult*> zero;
  for (const auto& r : ranked)
    if (r.z_diff == 0.0) zero.push_back(&r);
  for (std::size_t i = 1; i < zero.size(); ++i) {
    const auto& a = zero[i - 1]->combination;
    const auto& b = zero[i]->combination;
    CHECK((a.config.n_cond < b.config.n_cond ||
           (a.config.n_cond == b.config.n_cond && a.config.name <= b.config.name)));
  }
}

TEST_CASE("empty candidate set is a contract error") {
  RecoverOptions opt;
  opt.n_cond = 2;
  try {
    recover(table_tri_mars(), cat(), opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
  }
}

TEST_CASE("bound tightening on the triangular Mars line") {
  const auto starred = series_of("tri-21.67", "Mars", 75);
  const auto rep = tighten_bounds(cat(), combo("tri-21.67"), starred, quick());
  const auto* T = rep.find(ModelVar::T);
  const auto* r = rep.find(ModelVar::R);
  const auto* u1 = rep.find(ModelVar::U1);
  REQUIRE(T);
  REQUIRE(r);
  REQUIRE(u1);
  CHECK(T->gap() <= 2.0);
  CHECK(r->gap() <= 0.005);
  CHECK(u1->gap() <= 0.04);
  for (const auto& e : rep.entries) CHECK(e.min <= e.max);
  CHECK(std::abs(0.5 * (u1->min + u1->max) - 1100) / 1100 <= 1e-5);
  CHECK(std::abs(0.5 * (r->min + r->max) - 1.875) / 1.875 <= 1e-3);
}

TEST_CASE("unattainable starred values raise inconsistent-starred") {
  auto starred = series_of("tri-21.67", "Mars", 75);
  starred.X11 *= 3.0;
  try {
    tighten_bounds(cat(), combo("tri-21.67"), starred, quick());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentStarred);
  }
}

TEST_CASE("slack ranges on the triangular Mars line") {
  const auto ref = table_tri_mars();
  const auto res = slack_analysis(cat(), combo("tri-21.67"), ref, 0.05, {}, quick());
  REQUIRE(res.feasible);
  const auto* u1 = res.find(ModelVar::U1);
  const auto* r = res.find(ModelVar::R);
  REQUIRE(u1);
  REQUIRE(r);
  CHECK(u1->min == doctest::Approx(694).epsilon(0.01));
  CHECK(u1->max == doctest::Approx(1500).epsilon(0.001));
  CHECK(r->min == doctest::Approx(1.587).epsilon(0.005));
  CHECK(r->max == doctest::Approx(2.017).epsilon(0.005));
  // the standard radii of the neighbours lie outside
  CHECK(r->min > cat().conductor("Libra").r_std);
  CHECK(r->max < cat().conductor("Moon").r_std);
}

TEST_CASE("four-wire candidates are infeasible for a triangular line at 5 percent") {
  const auto ref = table_tri_mars();
  for (auto name : {"hori-4w", "neutral-under"}) {
    const auto res = slack_analysis(cat(), combo(name), ref, 0.05, {ModelVar::R}, quick());
    CHECK_MESSAGE(!res.feasible, name);
    CHECK(res.min_deviation > 0.05);
    CHECK(res.ranges.empty());
  }
}

TEST_CASE("slack ranges grow with beta") {
  const auto ref = oh_ref("tri-49.27", "Libra", 50);
  const std::vector<double> betas{0.0, 0.01, 0.03, 0.05};
  std::vector<SlackResult> res;
  for (double b : betas) res.push_back(slack_analysis(cat(), combo("tri-49.27"), ref, b, {}, quick()));
  for (const auto& r : res) REQUIRE(r.feasible);
  const double tol = 1e-6;
  for (std::size_t i = 1; i < res.size(); ++i)
    for (const auto& e : res[i - 1].ranges) {
      const auto* wide = res[i].find(e.var);
      REQUIRE(wide);
      CHECK(wide->min <= e.min + tol * std::max(1.0, std::abs(e.min)));
      CHECK(wide->max >= e.max - tol * std::max(1.0, std::abs(e.max)));
    }
  // beta = 0 gives point ranges
  for (const auto& e : res[0].ranges) {
    if (e.var == ModelVar::T) CHECK(e.gap() <= 2.0);
    else if (e.var == ModelVar::R) CHECK(e.gap() <= 0.005);
    else CHECK(e.gap() <= 0.04);
  }
}

TEST_CASE("identical inputs give identical rankings") {
  const auto ref = oh_ref("neutral-under", "Moon", 60);
  RecoverOptions opt;
  opt.solver = quick();
  const auto a = recover(ref, cat(), opt);
  opt.solver.workers = 4;
  const auto b = recover(ref, cat(), opt);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].combination == b[i].combination);
    CHECK(a[i].z_diff == b[i].z_diff);
    CHECK(a[i].x == b[i].x);
  }
}

TEST_CASE("random balanced Kron and sequence round trips") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& bounds = cat().bounds;
  for (int i = 0; i < 1000; ++i) {
    // a random overhead line on the horizontal 4-wire family
    const auto& c = cat().config(i % 2 ? "hori-4w" : "neutral-under");
    LineInput in;
    in.r = bounds.r_min + u(rng) * (bounds.r_max - bounds.r_min);
    in.T = bounds.T_min + u(rng) * (bounds.T_max - bounds.T_min);
    const double d = bounds.D_min_OH;
    if (c.family == Family::OhHorizontal4w) {
      in.geometry.u1 = d / 2 + u(rng) * (bounds.u_max_OH - 1.5 * d);
      in.geometry.u2 = *in.geometry.u1 + d + u(rng) * (bounds.u_max_OH - *in.geometry.u1 - d);
      in.geometry.v_ref = cat().standard_geometry(c.name)->v_ref;
    } else {
      in.geometry.u1 = d + u(rng) * (bounds.u_max_OH - d);
      in.geometry.v_ref = cat().standard_geometry(c.name)->v_ref;
      in.geometry.v1 = d + u(rng) * (*in.geometry.v_ref - d);
    }
    ForwardOptions fo;
    fo.include_shunt = false;
    const auto set = forward_chain(c, cat().material("Al-1350"), in, fo);
    // Kron: Z_kron = Z_pp - Z_pn Z_nn^-1 Z_np
    const auto& Z = set.Z_carson;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const auto expect = Z(a, b) - Z(a, 3) * Z(3, b) / Z(3, 3);
        CHECK(std::abs(set.Z_kron(a, b) - expect) <= 1e-12 * std::abs(expect) + 1e-14);
      }
    // and back: the transform preserves the trace
    std::complex<double> t1 = 0, t2 = 0;
    for (int a = 0; a < 3; ++a) {
      t1 += set.Z_kron(a, a);
      t2 += set.Z_012(a, a);
    }
    CHECK(std::abs(t1 - t2) <= 1e-12 * std::abs(t1));
    for (const auto& r : lifted_residuals(c, cat().material("Al-1350"), set)) CHECK(std::abs(r.value) <= 1e-9);
  }
}
