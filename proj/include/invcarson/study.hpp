#pragma once

// Studies built on the inverse solves: grid sweeps over forward samples,
// the standardized-cable mismatch matrix, and validation of utility records.

#include <optional>
#include <string>
#include <vector>

#include "invcarson/inverse.hpp"

namespace invcarson {

struct Grid {
  double min = 0.0, max = 0.0, step = 1.0;
  std::vector<double> values() const; // min, min+step, ... <= max (+1e-9)
};

struct SweepSpec {
  LineKind kind = LineKind::Overhead;
  /// Forward configurations and materials; empty means every candidate's.
  std::vector<std::string> forward_configs;
  std::vector<std::string> materials;
  Grid area{15, 240, 5};
  Grid sector_area{185, 300, 5};
  Grid temperature{20, 75, 5};
  double t_nom = 1.5; // insulation used by forward cable samples [mm]
  /// Inverse candidates; empty means candidate_combinations(kind).
  std::vector<Combination> candidates;
  std::vector<double> betas{0.0, 0.01, 0.03, 0.05};
};

/// Default grids for the full-density OH and cable sweeps.
SweepSpec overhead_sweep_spec();
SweepSpec cable_sweep_spec();

struct SweepPoint {
  Combination forward;
  double area = 0.0, T = 0.0, r = 0.0;
  SequenceComponents seq;
};

struct SweepRow {
  int point = 0;     // index into SweepReport::points
  int candidate = 0; // index into SweepReport::candidates
  double z_diff = 0.0;
  double min_deviation = 0.0; // phase-1 band; feasible at beta iff <= beta
  std::vector<bool> feasible; // per beta
};

/// Match flags of the discrete properties (conductor count, strand count,
/// material) between forward sample and candidate.
struct PropertyMatch {
  bool n_cond = false, strands = false, material = false;
  auto operator<=>(const PropertyMatch&) const = default;
  std::string label() const; // e.g. "n:Y N:X m:Y"
};

struct SweepAggregate {
  std::string key;
  int count = 0;
  double z_min = 0.0, z_mean = 0.0, z_max = 0.0;
  std::vector<double> feasible_percent; // per beta
};

struct SweepReport {
  SweepSpec spec;
  std::vector<SweepPoint> points;
  std::vector<Combination> candidates;
  std::vector<SweepRow> rows;
  int skipped = 0; // forward samples outside the radius bounds

  PropertyMatch match_of(const SweepRow& row) const;
  /// Aggregates keyed by "forward-config -> candidate-config".
  std::vector<SweepAggregate> by_configuration() const;
  /// Aggregates keyed by PropertyMatch::label().
  std::vector<SweepAggregate> by_property_match() const;
};

/// Forward samples over the grids (radius-bound violators skipped), then
/// feasibility and slack verdicts for every candidate. Series-only.
SweepReport mismatch_sweep(const Catalog& catalog, const SweepSpec& spec, const SolverOptions& solver = {});

// ---------------------------------------------------------------------------

/// Configuration for a catalog conductor with a given conductor count.
const ConfigSpec& config_for(const Catalog& catalog, const ConductorCatalogEntry& entry, int n_cond);

struct MismatchCell {
  bool feasible = false;
  double r_min = 0.0, r_max = 0.0; // recovered strand radius range [mm]
  bool flagged = false;            // candidate's standard radius lies in range
};

struct MismatchMatrix {
  std::vector<std::string> codes;
  double T = 75.0, beta = 0.05;
  std::vector<std::vector<MismatchCell>> cells; // [forward][inverse]
};

/// Standardized conductors on their standard geometries at temperature T:
/// each forward sample is tested against each inverse conductor's
/// combination under slack beta; the cell is flagged when the inverse
/// conductor's standard radius falls inside the slack range of r.
MismatchMatrix standard_mismatch_matrix(const Catalog& catalog, const std::vector<std::string>& codes, int n_cond,
                                        double T, double beta, const SolverOptions& solver = {});

// ---------------------------------------------------------------------------
// Utility-data validation

enum class ValidationFlag { FabricatedZeroSequence, NoCombinationExplains };
std::string_view to_string(ValidationFlag f);

struct ValidationOptions {
  RecoverOptions recover;
  double pattern_tolerance = 0.01;      // relative, for R00 = 4 R11 and X00 = X11
  double unexplained_threshold = 0.25;  // min z_diff over all candidates
  double match_tolerance = 0.05;        // z_diff accepted as an explanation
};

/// Percentage mismatch of one standard candidate: |recovered - std| / std of
/// u1 (overhead) or r (cable).
struct CandidateMismatch {
  std::string candidate; // configuration name (overhead) or conductor code (cable)
  Combination combination;
  double z_diff = 0.0;
  bool eliminated = false;
  ModelVar var = ModelVar::R;
  double recovered = 0.0;
  double standard = 0.0;
  double percent = 0.0;
};

struct ValidationReport {
  std::vector<ValidationFlag> flags;
  double min_zdiff_full = 0.0; // over all candidates with the data as given
  bool zero_sequence_dropped = false;
  SequenceReference used;
  std::vector<FeasibilityResult> ranking;
  std::vector<CandidateMismatch> candidates;
  std::optional<std::string> best; // lowest percentage among those not eliminated
};

bool fabricated_zero_sequence(const SequenceReference& ref, double tolerance = 0.01);

ValidationReport validate_record(const SequenceReference& ref, const Catalog& catalog,
                                 const ValidationOptions& options = {});

} // namespace invcarson
