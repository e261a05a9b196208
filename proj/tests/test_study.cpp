#include "doctest.h"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "invcarson/error.hpp"
#include "invcarson/study.hpp"

using namespace invcarson;

namespace {

const Catalog& cat() { return default_catalog(); }

SequenceReference utility_row(double r00, double x00, double r11, double x11) {
  SequenceReference ref;
  ref.kind = LineKind::Cable;
  ref.R00 = r00;
  ref.X00 = x00;
  ref.R11 = r11;
  ref.X11 = x11;
  return ref;
}

ErrorKind error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Schema;
}

const CandidateMismatch& candidate(const ValidationReport& rep, std::string_view code) {
  for (const auto& c : rep.candidates)
    if (c.candidate == code) return c;
  throw std::runtime_error("missing candidate");
}

} // namespace

TEST_CASE("grid values include both ends") {
  CHECK(Grid{15, 240, 25}.values().size() == 10);
  CHECK(Grid{20, 75, 5}.values().back() == doctest::Approx(75));
  CHECK(Grid{1, 1, 1}.values().size() == 1);
  CHECK(Grid{2, 1, 1}.values().empty());
  CHECK(error_of([] { Grid{0, 1, 0}.values(); }) == ErrorKind::Contract);
}

TEST_CASE("property match labels") {
  CHECK(PropertyMatch{true, false, true}.label() == "n:Y N:X m:Y");
  CHECK(PropertyMatch{false, false, false}.label() == "n:X N:X m:X");
}

TEST_CASE("empty sweep grid is a contract error") {
  auto spec = overhead_sweep_spec();
  spec.area = {300, 200, 5};
  CHECK(error_of([&] { mismatch_sweep(cat(), spec); }) == ErrorKind::Contract);
  spec = overhead_sweep_spec();
  spec.betas = {-0.1};
  CHECK(error_of([&] { mismatch_sweep(cat(), spec); }) == ErrorKind::Domain);
}

TEST_CASE("small overhead sweep separates conductor counts") {
  auto spec = overhead_sweep_spec();
  spec.forward_configs = {"tri-21.67"};
  spec.area = {50, 150, 50};
  spec.temperature = {20, 75, 55};
  SolverOptions so;
  so.starts = 8;
  so.workers = 4;
  const auto rep = mismatch_sweep(cat(), spec, so);
  // 150 mm2 on 7 strands exceeds r_max
  CHECK(rep.points.size() == 4);
  CHECK(rep.skipped == 2);
  CHECK(rep.rows.size() == rep.points.size() * rep.candidates.size());
  for (const auto& row : rep.rows) {
    REQUIRE(row.feasible.size() == spec.betas.size());
    const auto m = rep.match_of(row);
    if (m.n_cond) {
      CHECK(row.z_diff <= 1e-4);
      CHECK(row.feasible.back());
    } else {
      CHECK(row.z_diff >= 0.05);
      CHECK(row.z_diff <= 0.3);
      for (bool f : row.feasible) CHECK(!f);
    }
    // feasibility is monotone in beta
    for (std::size_t b = 1; b < row.feasible.size(); ++b) CHECK((!row.feasible[b - 1] || row.feasible[b]));
  }
  const auto agg = rep.by_property_match();
  int total = 0;
  for (const auto& a : agg) total += a.count;
  CHECK(total == static_cast<int>(rep.rows.size()));
}

TEST_CASE("sweep skips samples outside the radius bounds") {
  auto spec = overhead_sweep_spec();
  spec.forward_configs = {"hori-3w"};
  spec.candidates = {{cat().config("hori-3w"), cat().material("Al-1350")}};
  spec.area = {15, 240, 75}; // 15 mm2 on 7 strands is below r_min
  spec.temperature = {20, 20, 1};
  const auto rep = mismatch_sweep(cat(), spec);
  CHECK(rep.skipped >= 1);
  for (const auto& p : rep.points) {
    CHECK(p.r >= cat().bounds.r_min);
    CHECK(p.r <= cat().bounds.r_max);
  }
}

TEST_CASE("configuration for catalog cables") {
  CHECK(config_for(cat(), cat().conductor("LVABC3x25"), 3).name == "cable-3core-7N");
  CHECK(config_for(cat(), cat().conductor("UGC240x4Al"), 4).name == "cable-4core-48N-sector");
  CHECK(config_for(cat(), cat().conductor("LVABC3x25"), 4).name == "cable-4core-7N");
  CHECK(error_of([] { config_for(cat(), cat().conductor("Mars"), 3); }) == ErrorKind::Contract);
}

TEST_CASE("standardized four-core mismatch matrix") {
  const std::vector<std::string> codes{"LVABC4x25", "LVABC4x50", "LVABC4x95", "UGC16x4Cu", "UGC50x4Cu", "UGC240x4Al"};
  const auto mm = standard_mismatch_matrix(cat(), codes, 4, 75.0, 0.05);
  REQUIRE(mm.cells.size() == 6);
  auto expected = [&](int f, int i) {
    if (f == i) return true;
    const auto& a = codes[f];
    const auto& b = codes[i];
    return (a == "LVABC4x25" && b == "UGC16x4Cu") || (a == "UGC16x4Cu" && b == "LVABC4x25") ||
           (a == "LVABC4x95" && b == "UGC50x4Cu");
  };
  for (int f = 0; f < 6; ++f)
    for (int i = 0; i < 6; ++i) {
      const auto& cell = mm.cells[f][i];
      CHECK_MESSAGE(cell.flagged == expected(f, i), codes[f] << " -> " << codes[i]);
      if (cell.feasible) CHECK(cell.r_min <= cell.r_max);
    }
}

TEST_CASE("fabricated zero-sequence pattern") {
  CHECK(fabricated_zero_sequence(utility_row(4.6, 0.089, 1.15, 0.089)));
  CHECK(fabricated_zero_sequence(utility_row(0.5, 0.062, 0.126, 0.062)));
  CHECK(!fabricated_zero_sequence(utility_row(2.096, 1.5195, 1.1185, 0.0917)));
  SequenceReference series = utility_row(1, 1, 1, 1);
  series.R00.reset();
  series.X00.reset();
  CHECK(!fabricated_zero_sequence(series));
}

TEST_CASE("utility cable records are flagged and re-screened") {
  ValidationOptions opt;
  opt.recover.n_cond = 4;
  opt.recover.model.known_temperature = 20.0;
  const auto rep = validate_record(utility_row(1.55, 0.082, 0.388, 0.082), cat(), opt);
  CHECK(rep.flags.size() == 2);
  CHECK(rep.min_zdiff_full >= 0.25);
  CHECK(rep.zero_sequence_dropped);
  CHECK(!rep.used.has_zero_sequence());
  REQUIRE(rep.best);
  CHECK(*rep.best == "UGC50x4Cu");
  CHECK(candidate(rep, "UGC50x4Cu").percent == doctest::Approx(2.5).epsilon(0.4));
  CHECK(candidate(rep, "UGC240x4Al").eliminated);
  for (std::size_t i = 1; i < rep.ranking.size(); ++i) CHECK(rep.ranking[i - 1].z_diff <= rep.ranking[i].z_diff);
}

TEST_CASE("consistent records are not flagged") {
  const auto& e = cat().conductor("LVABC4x50");
  const auto& c = config_for(cat(), e, 4);
  ForwardOptions fo;
  fo.include_shunt = false;
  const auto seq = forward_pipeline(c, cat().material(e.material), standard_line_input(cat(), c, e, 40), fo);
  ValidationOptions opt;
  opt.recover.n_cond = 4;
  const auto rep = validate_record(SequenceReference::from(seq, LineKind::Cable), cat(), opt);
  CHECK(rep.flags.empty());
  CHECK(!rep.zero_sequence_dropped);
  CHECK(rep.min_zdiff_full <= 1e-6);
  REQUIRE(rep.best);
  CHECK(*rep.best == "LVABC4x50");
  CHECK(candidate(rep, "LVABC4x50").percent <= 0.1);
}
