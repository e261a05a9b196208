#pragma once

// Dense primal-dual interior-point solver for small smooth problems
//
//   min f(x)  s.t.  c_E(x) = 0,  c_I(x) >= 0,  l <= x <= u
//
// with exact second derivatives supplied by the problem. Bounds are kept
// strictly interior (barrier on x directly); general inequalities get slacks.

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace invcarson {

struct NlpEval {
  double f = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess_f;
  Eigen::VectorXd c_eq, c_in;
  Eigen::MatrixXd jac_eq, jac_in;
  std::vector<Eigen::MatrixXd> hess_eq, hess_in;

  void resize(int n, int m_eq, int m_in);
};

class NlpProblem {
public:
  virtual ~NlpProblem() = default;
  virtual int num_vars() const = 0;
  virtual int num_eq() const = 0;
  virtual int num_ineq() const = 0;
  virtual Eigen::VectorXd lower() const = 0;
  virtual Eigen::VectorXd upper() const = 0;
  /// Fills every field of out. Returns false outside the function domain
  /// (the solver then shortens its step).
  virtual bool evaluate(const Eigen::VectorXd& x, NlpEval& out) const = 0;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit, NumericalFailure };
std::string_view to_string(SolveStatus s);

struct IpmOptions {
  int max_iter = 300;
  double tol_stationarity = 1e-6;
  double tol_feasibility = 1e-8;
  double tol_complementarity = 1e-7;
  double mu_init = 0.1;
  double mu_min = 1e-11;
  /// Relative distance a start is pushed inside its bounds (and the floor
  /// of the initial inequality slacks).
  double bound_push = 1e-2;
  /// Used instead of bound_push and mu_init for warm starts, which are
  /// expected to be near a solution and must not be displaced.
  double warm_bound_push = 1e-8;
  double warm_mu_init = 1e-4;
};

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double f = 0.0;
  double violation = 0.0;   // max |c_E|, max(0, -c_I), bound excess
  double stationarity = 0.0; // scaled
  int iterations = 0;
};

IpmResult solve_ipm(const NlpProblem& problem, const Eigen::VectorXd& x0, const IpmOptions& options = {});

/// Largest constraint violation of x (no slacks involved).
double constraint_violation(const NlpProblem& problem, const Eigen::VectorXd& x);

/// Low-discrepancy points in [0,1]^dim: the Halton sequence with a random
/// (seeded) Cranley-Patterson shift, so different seeds give different but
/// reproducible point sets.
std::vector<std::vector<double>> halton_points(int dim, int count, std::uint64_t seed);

struct MultiStartResult {
  IpmResult best;
  int starts = 0;
  int converged = 0;
};

/// Runs solve_ipm from each start and keeps the best converged result
/// (smallest objective among points with violation <= feasibility_cutoff,
/// else smallest violation). Deterministic for a fixed start list. The
/// first warm_count starts use the warm-start push and barrier settings.
MultiStartResult multi_start(const NlpProblem& problem, const std::vector<Eigen::VectorXd>& starts,
                             const IpmOptions& options = {}, double feasibility_cutoff = 1e-6,
                             int warm_count = 0);

struct DerivativeCheck {
  double max_grad_error = 0.0;
  double max_jac_error = 0.0;
  double max_hess_error = 0.0;
};

/// Compares analytic first and second derivatives with central differences
/// (relative step h, errors relative to max(1, |value|)).
DerivativeCheck check_derivatives(const NlpProblem& problem, const Eigen::VectorXd& x, double h = 1e-6);

} // namespace invcarson
