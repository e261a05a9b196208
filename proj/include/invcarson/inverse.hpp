#pragma once

// Inverse problems: recover conductor, temperature and geometry variables of a
// (configuration, material) combination from diagonal sequence components.
//
// Three problems share one model builder:
//   feasibility     min mean |f_k / ref_k - 1|            (epigraph form)
//   fixed-sequence  min/max one variable, f_k = starred_k  (bound tightening)
//   slack           min/max one variable, |f_k / ref_k - 1| <= beta
//
// The model is solved in reduced space: the physical variables (strand
// radius, temperature, free geometry, insulation) are the only nonlinear
// unknowns and every intermediate quantity of the forward chain is eliminated
// by evaluating the chain in closed form with second-order jets. The lifted
// constraint system (distances, product-form resistance, Kron and transform
// identities) is exposed separately by lifted_residuals.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "invcarson/catalog.hpp"
#include "invcarson/forward.hpp"
#include "invcarson/nlp.hpp"
#include "invcarson/parallel.hpp"

namespace invcarson {

enum class Component { R00, X00, R11, X11, B00, B11 };
inline constexpr int kComponentCount = 6;
std::string_view to_string(Component c);

/// Given diagonal sequence components. R00/X00 may be dropped (treated as
/// missing); R11/X11 are always required.
struct SequenceReference {
  std::optional<double> R00, X00;
  double R11 = 0.0, X11 = 0.0;       // [Ohm/km]
  std::optional<double> B00, B11;    // [uS/km]
  LineKind kind = LineKind::Overhead;

  bool has_shunt() const { return B00.has_value() && B11.has_value(); }
  bool has_zero_sequence() const { return R00.has_value() && X00.has_value(); }
  std::optional<double> get(Component c) const;
  std::vector<Component> present() const;

  static SequenceReference from(const SequenceComponents& s, LineKind kind);
  /// Throws Domain unless every present value is positive and finite.
  void check() const;
};

double component_of(const SequenceComponents& s, Component c);

/// Mean normalized absolute deviation over the components present in ref.
/// Fitted must carry every component ref carries.
double zdiff(const SequenceComponents& fitted, const SequenceReference& ref);

enum class ModelVar { R, T, U1, U2, V1, VRef, TNom };
std::string_view to_string(ModelVar v);
ModelVar model_var_from_string(std::string_view text);

enum class Mode { Feasibility, FixedSequence, Slack, MinDeviation };
enum class Objective { ZDiff, Minimize, Maximize, MaxDeviation };
std::string_view to_string(Mode m);

struct ModelOptions {
  /// Fixes the temperature instead of leaving it free within the bounds.
  std::optional<double> known_temperature;
  /// Height used when v_ref is not a decision variable (series-only models).
  /// Defaults to the configuration's standard height.
  std::optional<double> fixed_v_ref;
};

struct ModelSpec {
  Mode mode = Mode::Feasibility;
  Objective objective = Objective::ZDiff;
  std::optional<ModelVar> target; // for Minimize/Maximize
  double beta = 0.0;              // Slack only
};

class InverseModel final : public NlpProblem {
public:
  struct FreeVar {
    ModelVar var;
    double lo, hi;
  };

  /// ref holds the reference values (feasibility, slack, min-deviation) or
  /// the starred values (fixed-sequence).
  InverseModel(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
               const ModelSpec& spec, const ModelOptions& options = {});

  int num_vars() const override { return np_ + na_; }
  int num_eq() const override { return me_; }
  int num_ineq() const override { return mi_; }
  Eigen::VectorXd lower() const override;
  Eigen::VectorXd upper() const override;
  bool evaluate(const Eigen::VectorXd& x, NlpEval& out) const override;

  const Combination& combination() const { return comb_; }
  const ModelSpec& spec() const { return spec_; }
  const std::vector<FreeVar>& free_vars() const { return vars_; }
  const std::vector<Component>& components() const { return comps_; }
  bool includes_shunt() const { return shunt_; }
  /// Number of physical decision variables (the effective degrees of freedom).
  int dof() const { return np_; }
  /// Variables whose range bound tightening reports: the free physical ones,
  /// plus u1 for circular cables where it follows from r and t_nom.
  std::vector<ModelVar> phi() const;

  /// Physical value of a variable at x (free, fixed, or derived).
  double value(const Eigen::VectorXd& x, ModelVar v) const;
  std::optional<double> value_if_defined(const Eigen::VectorXd& x, ModelVar v) const;
  /// Scaled position of the physical point p; used to warm-start and in tests.
  Eigen::VectorXd encode(const LineInput& p) const;
  LineInput line_input(const Eigen::VectorXd& x) const;
  /// Physical values of the free variables (in free_vars() order) and back.
  /// Models of one combination share the order, so physical vectors carry
  /// warm starts between them.
  Eigen::VectorXd physical(const Eigen::VectorXd& x) const;
  Eigen::VectorXd scaled(const Eigen::VectorXd& physical) const;
  SequenceComponents sequence_at(const Eigen::VectorXd& x) const;

  /// A full starting vector for scaled physical coordinates s (size dof()),
  /// with auxiliaries set strictly feasible.
  Eigen::VectorXd start_from(const Eigen::VectorXd& s) const;

private:
  template <class S>
  LinePoint<S> assemble(const S* free) const;
  LinePoint<double> point(const Eigen::VectorXd& x) const;
  int geometry_rows() const;

  const Catalog* catalog_;
  Combination comb_;
  SequenceReference ref_;
  ModelSpec spec_;
  ModelOptions opt_;
  bool shunt_ = false;
  double v_ref_fixed_ = 0.0;
  std::vector<FreeVar> vars_;
  std::vector<Component> comps_;       // components in the objective/constraints
  std::vector<double> comp_ref_;
  int np_ = 0, na_ = 0, me_ = 0, mi_ = 0;
  int slot_[7];                        // ModelVar -> index in vars_, or -1
};

/// Fixed-sequence components for bound tightening: R11, X00, X11 for three
/// conductors (R00 would over-constrain), all four for four conductors, plus
/// B00, B11 when shunt data is present. Only components present in ref.
std::vector<Component> fixed_components(const ConfigSpec& config, const SequenceReference& ref);

struct SolverOptions {
  int starts = 16;
  std::uint64_t seed = 20240917;
  IpmOptions ipm;
  double feasibility_cutoff = 1e-6;
  /// Extra starts for each min/max solve besides the warm start.
  int range_starts = 4;
  int workers = 1;
};

struct SolutionRecord {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double violation = 0.0;
  int starts = 0;
  int converged = 0;
};

/// Multi-start solve from seeded low-discrepancy points of the scaled box.
/// warm (physical values of the free variables), when given, is tried first.
SolutionRecord solve(const InverseModel& model, const SolverOptions& options,
                     const std::optional<Eigen::VectorXd>& warm = std::nullopt);

struct VariableValue {
  ModelVar var;
  double value;
};

struct FeasibilityResult {
  Combination combination;
  double z_diff = 0.0;
  SequenceComponents fitted;
  std::vector<VariableValue> variables;
  SolveStatus status = SolveStatus::NumericalFailure;
  int starts = 0;
  int converged = 0;
  Eigen::VectorXd x; // physical values of the free variables, for warm starts
};

struct RecoverOptions {
  SolverOptions solver;
  ModelOptions model;
  /// Known metadata narrowing the candidate set.
  std::optional<int> n_cond;
  std::optional<bool> buried; // true: copper and aluminium cables; false: aluminium only
};

FeasibilityResult feasibility(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                              const SolverOptions& solver = {}, const ModelOptions& model = {});

/// Candidate combinations for ref.kind after metadata pruning.
std::vector<Combination> recovery_candidates(const Catalog& catalog, LineKind kind, const RecoverOptions& options);

/// Feasibility for every candidate, sorted by z_diff, then fewer conductors,
/// then configuration name, then material name.
std::vector<FeasibilityResult> recover(const SequenceReference& ref, const Catalog& catalog,
                                       const RecoverOptions& options = {});

struct BoundEntry {
  ModelVar var;
  double min = 0.0, max = 0.0;
  double gap() const { return max - min; }
};

struct BoundReport {
  Combination combination;
  std::vector<BoundEntry> entries;
  const BoundEntry* find(ModelVar v) const;
};

/// Min and max of each variable in phi with the fixed components held at
/// their starred values. Throws InconsistentStarred when no point attains them.
BoundReport tighten_bounds(const Catalog& catalog, const Combination& combination,
                           const SequenceComponents& starred, const SolverOptions& solver = {},
                           const ModelOptions& model = {}, std::optional<Eigen::VectorXd> warm = std::nullopt);

struct BandResult {
  double deviation = 0.0; // smallest achievable max |f_k / ref_k - 1|
  Eigen::VectorXd x;      // free variables (physical) attaining it
};

/// The phase-one problem of the slack analysis: min t s.t. every component
/// lies within the band (1 +- t) ref_k. Slack beta is feasible iff t <= beta.
BandResult min_band(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                    const SolverOptions& solver = {}, const ModelOptions& model = {});

struct SlackResult {
  double beta = 0.0;
  bool feasible = false;
  double min_deviation = 0.0; // smallest achievable max |f_k / ref_k - 1|
  std::vector<BoundEntry> ranges;
  const BoundEntry* find(ModelVar v) const;
};

/// Feasibility verdict and per-variable ranges under the slack band. An empty
/// variable list means every variable in phi.
SlackResult slack_analysis(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                           double beta, const std::vector<ModelVar>& variables = {},
                           const SolverOptions& solver = {}, const ModelOptions& model = {});

// ---------------------------------------------------------------------------
// Lifted constraint system

struct Residual {
  std::string name;
  double value; // scaled so that O(1) quantities give O(1) residuals
};

/// Residuals of the real, differentiable constraint system (squared
/// distances, product-form resistance, Kron and sequence relations written
/// without division) at the intermediates of a forward chain. All vanish at
/// a consistent point.
std::vector<Residual> lifted_residuals(const ConfigSpec& config, const MaterialSpec& material,
                                       const ImpedanceSet& set, const CarsonConstants& k = carson_constants());

} // namespace invcarson
