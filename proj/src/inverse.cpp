#include "invcarson/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invcarson/error.hpp"

namespace invcarson {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kVarCount = 7;
constexpr double kFixedSequencePad = 1e-5;

int idx(ModelVar v) { return static_cast<int>(v); }

bool is_circular_cable(const ConfigSpec& c) { return c.is_cable() && !c.is_sector(); }

} // namespace

std::string_view to_string(Component c) {
  switch (c) {
  case Component::R00: return "R00";
  case Component::X00: return "X00";
  case Component::R11: return "R11";
  case Component::X11: return "X11";
  case Component::B00: return "B00";
  case Component::B11: return "B11";
  }
  return "?";
}

std::string_view to_string(ModelVar v) {
  switch (v) {
  case ModelVar::R: return "r";
  case ModelVar::T: return "T";
  case ModelVar::U1: return "u1";
  case ModelVar::U2: return "u2";
  case ModelVar::V1: return "v1";
  case ModelVar::VRef: return "v_ref";
  case ModelVar::TNom: return "t_nom";
  }
  return "?";
}

ModelVar model_var_from_string(std::string_view text) {
  for (int i = 0; i < kVarCount; ++i)
    if (to_string(static_cast<ModelVar>(i)) == text) return static_cast<ModelVar>(i);
  fail(ErrorKind::Contract, "unknown variable '" + std::string(text) + "'");
}

std::string_view to_string(Mode m) {
  switch (m) {
  case Mode::Feasibility: return "feasibility";
  case Mode::FixedSequence: return "fixed-sequence";
  case Mode::Slack: return "slack";
  case Mode::MinDeviation: return "min-deviation";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// References

std::optional<double> SequenceReference::get(Component c) const {
  switch (c) {
  case Component::R00: return R00;
  case Component::X00: return X00;
  case Component::R11: return R11;
  case Component::X11: return X11;
  case Component::B00: return B00;
  case Component::B11: return B11;
  }
  return std::nullopt;
}

std::vector<Component> SequenceReference::present() const {
  std::vector<Component> out;
  for (int i = 0; i < kComponentCount; ++i)
    if (get(static_cast<Component>(i))) out.push_back(static_cast<Component>(i));
  return out;
}

SequenceReference SequenceReference::from(const SequenceComponents& s, LineKind kind) {
  SequenceReference r;
  r.R00 = s.R00;
  r.X00 = s.X00;
  r.R11 = s.R11;
  r.X11 = s.X11;
  r.B00 = s.B00;
  r.B11 = s.B11;
  r.kind = kind;
  return r;
}

void SequenceReference::check() const {
  if (B00.has_value() != B11.has_value()) fail(ErrorKind::Domain, "B00 and B11 must be given together");
  if (R00.has_value() != X00.has_value()) fail(ErrorKind::Domain, "R00 and X00 must be given together");
  for (Component c : present()) {
    const double v = *get(c);
    if (!(v > 0) || !std::isfinite(v))
      fail(ErrorKind::Domain,
           "reference " + std::string(to_string(c)) + " must be positive, got " + std::to_string(v));
  }
}

double component_of(const SequenceComponents& s, Component c) {
  switch (c) {
  case Component::R00: return s.R00;
  case Component::X00: return s.X00;
  case Component::R11: return s.R11;
  case Component::X11: return s.X11;
  case Component::B00:
    if (!s.B00) fail(ErrorKind::Contract, "fitted values carry no B00");
    return *s.B00;
  case Component::B11:
    if (!s.B11) fail(ErrorKind::Contract, "fitted values carry no B11");
    return *s.B11;
  }
  return 0.0;
}

double zdiff(const SequenceComponents& fitted, const SequenceReference& ref) {
  ref.check();
  const auto comps = ref.present();
  double sum = 0.0;
  for (Component c : comps) sum += std::abs(component_of(fitted, c) - *ref.get(c)) / *ref.get(c);
  return sum / static_cast<double>(comps.size());
}

std::vector<Component> fixed_components(const ConfigSpec& config, const SequenceReference& ref) {
  std::vector<Component> want;
  if (config.n_cond == 4) want = {Component::R00, Component::X00, Component::R11, Component::X11};
  else want = {Component::X00, Component::R11, Component::X11};
  want.push_back(Component::B00);
  want.push_back(Component::B11);
  std::vector<Component> out;
  for (Component c : want)
    if (ref.get(c)) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Model

InverseModel::InverseModel(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                           const ModelSpec& spec, const ModelOptions& options)
    : catalog_(&catalog), comb_(combination), ref_(ref), spec_(spec), opt_(options) {
  ref_.check();
  const ConfigSpec& cfg = comb_.config;
  const BoundSet& b = catalog.bounds;

  const bool ok = (spec.mode == Mode::Feasibility && spec.objective == Objective::ZDiff) ||
                  (spec.mode == Mode::MinDeviation && spec.objective == Objective::MaxDeviation) ||
                  ((spec.mode == Mode::FixedSequence || spec.mode == Mode::Slack) &&
                   (spec.objective == Objective::Minimize || spec.objective == Objective::Maximize));
  if (!ok) fail(ErrorKind::Contract, "objective incompatible with " + std::string(to_string(spec.mode)) + " mode");
  if (spec.mode == Mode::Slack && !(spec.beta >= 0)) fail(ErrorKind::Domain, "slack beta must be nonnegative");
  if (cfg.n_cond != 3 && cfg.n_cond != 4)
    fail(ErrorKind::UnsupportedGeometry, "inverse estimation needs a 3- or 4-conductor configuration");
  if (cfg.kind != ref.kind) fail(ErrorKind::Contract, "reference kind differs from configuration kind");

  shunt_ = ref_.has_shunt();
  if (shunt_ && !cfg.strand.K_r)
    fail(ErrorKind::UnsupportedGeometry, cfg.name + " has no packing coefficient; shunt references unsupported");

  // Physical variables and their boxes.
  const double dmin = b.D_min_OH;
  auto add = [&](ModelVar v, double lo, double hi) {
    if (!(lo < hi)) fail(ErrorKind::Contract, "empty range for " + std::string(to_string(v)));
    vars_.push_back({v, lo, hi});
  };
  {
    const int N = cfg.strand.N;
    const double a_lo = cfg.is_sector() ? b.A_min_sector : b.A_min;
    const double a_hi = cfg.is_sector() ? b.A_max_sector : b.A_max;
    add(ModelVar::R, std::max(b.r_min, radius_for_area(N, a_lo)), std::min(b.r_max, radius_for_area(N, a_hi)));
  }
  if (!opt_.known_temperature) add(ModelVar::T, b.T_min, b.T_max);

  const StandardGeometry* sg = catalog.standard_geometry(cfg.name);
  if (shunt_) {
    add(ModelVar::VRef, b.v_ref_min(cfg.kind), b.v_ref_max(cfg.kind));
  } else if (opt_.fixed_v_ref) {
    v_ref_fixed_ = *opt_.fixed_v_ref;
  } else if (sg && sg->v_ref) {
    v_ref_fixed_ = *sg->v_ref;
  } else {
    v_ref_fixed_ = cfg.is_cable() ? b.v_ref_max(cfg.kind) : b.v_ref_min(cfg.kind);
  }

  switch (cfg.family) {
  case Family::OhHorizontal4w:
    add(ModelVar::U1, dmin / 2, b.u_max_OH - dmin);
    add(ModelVar::U2, 1.5 * dmin, b.u_max_OH);
    break;
  case Family::OhNeutralUnder:
    add(ModelVar::U1, dmin, b.u_max_OH);
    add(ModelVar::V1, dmin, shunt_ ? b.v_ref_max(cfg.kind) : v_ref_fixed_);
    break;
  case Family::OhHorizontal3w: add(ModelVar::U1, dmin, b.u_max_OH); break;
  case Family::OhTriangular: {
    const double theta = cfg.theta_deg.value_or(0.0) * kPi / 180.0;
    add(ModelVar::U1, std::max(dmin / 2, dmin * std::cos(theta)), b.u_max_OH);
    break;
  }
  case Family::Cable4Core:
  case Family::Cable3Core:
    if (cfg.is_sector()) add(ModelVar::U1, b.u_min_cable, b.u_max_cable);
    else add(ModelVar::TNom, b.t_nom_min, b.t_nom_max);
    break;
  default: fail(ErrorKind::UnsupportedGeometry, "no inverse model for family " + std::string(to_string(cfg.family)));
  }

  if (spec.mode == Mode::FixedSequence) {
    // Equalities pin the point; when it sits on a box bound the interior is
    // empty, so the box gets a sliver of room.
    for (auto& v : vars_) {
      const double pad = kFixedSequencePad * (v.hi - v.lo);
      v.lo -= pad;
      v.hi += pad;
    }
  }

  std::fill(std::begin(slot_), std::end(slot_), -1);
  for (std::size_t i = 0; i < vars_.size(); ++i) slot_[idx(vars_[i].var)] = static_cast<int>(i);
  np_ = static_cast<int>(vars_.size());
  if (np_ > ModelJet::kDim) fail(ErrorKind::Contract, "too many decision variables for the jet width");

  comps_ = spec.mode == Mode::FixedSequence ? fixed_components(cfg, ref_) : ref_.present();
  for (Component c : comps_) comp_ref_.push_back(*ref_.get(c));
  const int K = static_cast<int>(comps_.size());

  if (spec.target) {
    const auto p = phi();
    if (std::find(p.begin(), p.end(), *spec.target) == p.end())
      fail(ErrorKind::Contract, "variable " + std::string(to_string(*spec.target)) + " is not free in " + cfg.name);
  } else if (spec.objective == Objective::Minimize || spec.objective == Objective::Maximize) {
    fail(ErrorKind::Contract, "min/max objective needs a target variable");
  }

  switch (spec.mode) {
  case Mode::Feasibility:
    na_ = K;
    mi_ = 2 * K;
    break;
  case Mode::FixedSequence: me_ = K; break;
  case Mode::Slack: mi_ = 2 * K; break;
  case Mode::MinDeviation:
    na_ = 1;
    mi_ = 2 * K;
    break;
  }
  mi_ += geometry_rows();
}

int InverseModel::geometry_rows() const {
  switch (comb_.config.family) {
  case Family::OhHorizontal4w: return 1;
  case Family::OhNeutralUnder: return shunt_ ? 1 : 0;
  default: return is_circular_cable(comb_.config) ? 2 : 0;
  }
}

std::vector<ModelVar> InverseModel::phi() const {
  std::vector<ModelVar> out;
  for (const auto& v : vars_)
    if (v.var != ModelVar::VRef) out.push_back(v.var);
  if (is_circular_cable(comb_.config)) out.insert(out.begin() + (slot_[idx(ModelVar::T)] >= 0 ? 2 : 1), ModelVar::U1);
  if (shunt_) out.push_back(ModelVar::VRef);
  return out;
}

VectorXd InverseModel::lower() const {
  VectorXd l = VectorXd::Constant(num_vars(), -kInf);
  l.head(np_).setZero();
  return l;
}

VectorXd InverseModel::upper() const {
  VectorXd u = VectorXd::Constant(num_vars(), kInf);
  u.head(np_).setOnes();
  return u;
}

template <class S>
LinePoint<S> InverseModel::assemble(const S* free) const {
  auto get = [&](ModelVar v, double fallback) -> S {
    const int s = slot_[idx(v)];
    return s >= 0 ? free[s] : S(fallback);
  };
  LinePoint<S> p;
  p.r = get(ModelVar::R, 0.0);
  p.T = get(ModelVar::T, opt_.known_temperature.value_or(20.0));
  p.u2 = get(ModelVar::U2, 0.0);
  p.v1 = get(ModelVar::V1, 0.0);
  p.v_ref = get(ModelVar::VRef, v_ref_fixed_);
  if (is_circular_cable(comb_.config)) p.u1 = p.r * *comb_.config.strand.K_r + get(ModelVar::TNom, 0.0);
  else p.u1 = get(ModelVar::U1, 0.0);
  return p;
}

LinePoint<double> InverseModel::point(const VectorXd& x) const {
  double phys[ModelJet::kDim];
  for (int i = 0; i < np_; ++i) phys[i] = vars_[i].lo + (vars_[i].hi - vars_[i].lo) * x[i];
  return assemble(phys);
}

double InverseModel::value(const VectorXd& x, ModelVar v) const {
  const auto r = value_if_defined(x, v);
  if (!r) fail(ErrorKind::Contract, std::string(to_string(v)) + " is not defined for " + comb_.config.name);
  return *r;
}

std::optional<double> InverseModel::value_if_defined(const VectorXd& x, ModelVar v) const {
  const LinePoint<double> p = point(x);
  const Family f = comb_.config.family;
  switch (v) {
  case ModelVar::R: return p.r;
  case ModelVar::T: return p.T;
  case ModelVar::U1: return p.u1;
  case ModelVar::U2:
    if (f == Family::OhHorizontal4w) return p.u2;
    return std::nullopt;
  case ModelVar::V1:
    if (f == Family::OhNeutralUnder) return p.v1;
    return std::nullopt;
  case ModelVar::VRef: return p.v_ref;
  case ModelVar::TNom:
    if (is_circular_cable(comb_.config)) return p.u1 - p.r * *comb_.config.strand.K_r;
    return std::nullopt;
  }
  return std::nullopt;
}

VectorXd InverseModel::encode(const LineInput& in) const {
  VectorXd s(np_);
  for (int i = 0; i < np_; ++i) {
    double v = 0.0;
    switch (vars_[i].var) {
    case ModelVar::R: v = in.r; break;
    case ModelVar::T: v = in.T; break;
    case ModelVar::U1: v = in.geometry.u1.value_or(0.0); break;
    case ModelVar::U2: v = in.geometry.u2.value_or(0.0); break;
    case ModelVar::V1: v = in.geometry.v1.value_or(0.0); break;
    case ModelVar::VRef: v = in.geometry.v_ref.value_or(0.0); break;
    case ModelVar::TNom: v = in.t_nom; break;
    }
    s[i] = (v - vars_[i].lo) / (vars_[i].hi - vars_[i].lo);
  }
  return s;
}

VectorXd InverseModel::physical(const VectorXd& x) const {
  VectorXd p(np_);
  for (int i = 0; i < np_; ++i) p[i] = vars_[i].lo + (vars_[i].hi - vars_[i].lo) * x[i];
  return p;
}

VectorXd InverseModel::scaled(const VectorXd& p) const {
  VectorXd x(np_);
  for (int i = 0; i < np_; ++i) x[i] = (p[i] - vars_[i].lo) / (vars_[i].hi - vars_[i].lo);
  return x;
}

LineInput InverseModel::line_input(const VectorXd& x) const {
  const LinePoint<double> p = point(x);
  LineInput in;
  in.r = p.r;
  in.T = p.T;
  in.geometry.v_ref = p.v_ref;
  const Family f = comb_.config.family;
  if (is_circular_cable(comb_.config)) {
    in.t_nom = p.u1 - p.r * *comb_.config.strand.K_r;
  } else {
    in.geometry.u1 = p.u1;
  }
  if (f == Family::OhHorizontal4w) in.geometry.u2 = p.u2;
  if (f == Family::OhNeutralUnder) in.geometry.v1 = p.v1;
  return in;
}

SequenceComponents InverseModel::sequence_at(const VectorXd& x) const {
  const auto out = sequence_chain(comb_.config, comb_.material, catalog_->constants, point(x), shunt_);
  SequenceComponents s{out.R00, out.R11, out.X00, out.X11, std::nullopt, std::nullopt};
  if (out.has_shunt) {
    s.B00 = out.B00;
    s.B11 = out.B11;
  }
  return s;
}

namespace {

// Copies a jet over the physical block of a row/matrix.
void put(const ModelJet& j, int np, double w_scale, double& value, Eigen::Ref<VectorXd> grad, MatrixXd* hess) {
  value = j.v * w_scale;
  for (int a = 0; a < np; ++a) grad[a] = j.g[a] * w_scale;
  if (hess)
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b) (*hess)(a, b) = j.hess(a, b) * w_scale;
}

double component(const SequenceOut<ModelJet>& o, Component c, ModelJet& out) {
  switch (c) {
  case Component::R00: out = o.R00; break;
  case Component::X00: out = o.X00; break;
  case Component::R11: out = o.R11; break;
  case Component::X11: out = o.X11; break;
  case Component::B00: out = o.B00; break;
  case Component::B11: out = o.B11; break;
  }
  return out.v;
}

} // namespace

bool InverseModel::evaluate(const VectorXd& x, NlpEval& out) const {
  const int n = num_vars();
  out.resize(n, me_, mi_);

  ModelJet phys[ModelJet::kDim];
  for (int i = 0; i < np_; ++i) {
    const double w = vars_[i].hi - vars_[i].lo;
    phys[i] = ModelJet(vars_[i].lo + w * x[i]);
    phys[i].g[i] = w;
  }
  const LinePoint<ModelJet> p = assemble(phys);

  SequenceOut<ModelJet> so;
  try {
    so = sequence_chain(comb_.config, comb_.material, catalog_->constants, p, shunt_);
  } catch (const Error&) {
    return false;
  }

  const int K = static_cast<int>(comps_.size());
  std::vector<ModelJet> dev(K);
  for (int k = 0; k < K; ++k) {
    ModelJet f;
    component(so, comps_[k], f);
    dev[k] = f * (1.0 / comp_ref_[k]) - 1.0;
    if (!std::isfinite(dev[k].v)) return false;
  }

  // Objective.
  out.f = 0.0;
  out.grad.setZero();
  out.hess_f.setZero();
  switch (spec_.objective) {
  case Objective::ZDiff:
    for (int k = 0; k < K; ++k) {
      out.f += x[np_ + k] / K;
      out.grad[np_ + k] = 1.0 / K;
    }
    break;
  case Objective::MaxDeviation:
    out.f = x[np_];
    out.grad[np_] = 1.0;
    break;
  case Objective::Minimize:
  case Objective::Maximize: {
    const double sign = spec_.objective == Objective::Minimize ? 1.0 : -1.0;
    const ModelVar t = *spec_.target;
    const int s = slot_[idx(t)];
    if (s >= 0) {
      out.f = sign * x[s];
      out.grad[s] = sign;
    } else {
      // u1 of a circular cable, scaled over its attainable range.
      const double Kr = *comb_.config.strand.K_r;
      const auto& vr = vars_[slot_[idx(ModelVar::R)]];
      const auto& vt = vars_[slot_[idx(ModelVar::TNom)]];
      const double lo = Kr * vr.lo + vt.lo, hi = Kr * vr.hi + vt.hi;
      const ModelJet u = (p.u1 - lo) * (1.0 / (hi - lo));
      put(u, np_, sign, out.f, out.grad, &out.hess_f);
    }
    break;
  }
  }

  // Deviation rows: equalities for fixed-sequence, paired inequalities
  // otherwise (epigraph, slack band, or L-infinity bound).
  int row = 0;
  auto ineq_pair = [&](int k, double bound_value, int aux) {
    // bound - dev >= 0 and bound + dev >= 0, with bound = beta or aux variable.
    for (double sign : {-1.0, 1.0}) {
      VectorXd g = VectorXd::Zero(n);
      double v = 0.0;
      put(dev[k], np_, sign, v, g, &out.hess_in[row]);
      if (aux >= 0) g[aux] = 1.0;
      out.jac_in.row(row) = g.transpose();
      out.c_in[row] = v + (aux >= 0 ? x[aux] : bound_value);
      ++row;
    }
  };

  switch (spec_.mode) {
  case Mode::FixedSequence:
    for (int k = 0; k < K; ++k) {
      VectorXd g = VectorXd::Zero(n);
      put(dev[k], np_, 1.0, out.c_eq[k], g, &out.hess_eq[k]);
      out.jac_eq.row(k) = g.transpose();
    }
    break;
  case Mode::Feasibility:
    for (int k = 0; k < K; ++k) ineq_pair(k, 0.0, np_ + k);
    break;
  case Mode::MinDeviation:
    for (int k = 0; k < K; ++k) ineq_pair(k, 0.0, np_);
    break;
  case Mode::Slack:
    for (int k = 0; k < K; ++k) ineq_pair(k, spec_.beta, -1);
    break;
  }

  // Geometry rows, normalized to O(1).
  const BoundSet& b = catalog_->bounds;
  auto geo = [&](const ModelJet& j) {
    VectorXd g = VectorXd::Zero(n);
    put(j, np_, 1.0, out.c_in[row], g, &out.hess_in[row]);
    out.jac_in.row(row) = g.transpose();
    ++row;
  };
  switch (comb_.config.family) {
  case Family::OhHorizontal4w: geo((p.u2 - p.u1 - b.D_min_OH) * (1.0 / b.D_min_OH)); break;
  case Family::OhNeutralUnder:
    if (shunt_) geo((p.v_ref - p.v1) * (1.0 / b.D_min_OH));
    break;
  default:
    if (is_circular_cable(comb_.config)) {
      const double w = b.u_max_cable - b.u_min_cable;
      geo((p.u1 - b.u_min_cable) * (1.0 / w));
      geo((ModelJet(b.u_max_cable) - p.u1) * (1.0 / w));
    }
    break;
  }
  return std::isfinite(out.f) && out.c_in.allFinite() && out.c_eq.allFinite();
}

VectorXd InverseModel::start_from(const VectorXd& s) const {
  VectorXd x = VectorXd::Zero(num_vars());
  for (int i = 0; i < np_; ++i) x[i] = std::clamp(s[i], 0.0, 1.0);
  if (na_ == 0) return x;
  std::vector<double> dev(comps_.size(), 1.0);
  try {
    const SequenceComponents sc = sequence_at(x);
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      const double d = component_of(sc, comps_[k]) / comp_ref_[k] - 1.0;
      if (std::isfinite(d)) dev[k] = std::abs(d);
    }
  } catch (const Error&) {
  }
  if (spec_.mode == Mode::Feasibility) {
    for (std::size_t k = 0; k < comps_.size(); ++k) x[np_ + static_cast<int>(k)] = dev[k] + 0.1;
  } else {
    x[np_] = *std::max_element(dev.begin(), dev.end()) + 0.1;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Solves

SolutionRecord solve(const InverseModel& model, const SolverOptions& options, const std::optional<VectorXd>& warm) {
  if (options.starts < 1 && !warm) fail(ErrorKind::Contract, "start count must be at least 1");
  std::vector<VectorXd> starts;
  if (warm) starts.push_back(model.start_from(model.scaled(*warm)));
  const int np = model.dof();
  for (const auto& pt : halton_points(np, options.starts, options.seed))
    starts.push_back(model.start_from(Eigen::Map<const VectorXd>(pt.data(), np)));

  const MultiStartResult ms = multi_start(model, starts, options.ipm, options.feasibility_cutoff, warm ? 1 : 0);
  SolutionRecord rec;
  rec.x = ms.best.x;
  rec.objective = ms.best.f;
  rec.violation = ms.best.violation;
  rec.starts = ms.starts;
  rec.converged = ms.converged;
  if (ms.best.violation > options.feasibility_cutoff) rec.status = SolveStatus::Infeasible;
  else rec.status = ms.best.status == SolveStatus::Infeasible ? SolveStatus::Optimal : ms.best.status;
  if (rec.status != SolveStatus::Infeasible && ms.converged == 0) rec.status = ms.best.status;
  return rec;
}

FeasibilityResult feasibility(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                              const SolverOptions& solver, const ModelOptions& model_options) {
  const InverseModel model(catalog, combination, ref, {Mode::Feasibility, Objective::ZDiff, {}, 0.0}, model_options);
  const SolutionRecord rec = solve(model, solver);
  FeasibilityResult out;
  out.combination = combination;
  out.status = rec.status;
  out.starts = rec.starts;
  out.converged = rec.converged;
  out.x = model.physical(rec.x);
  out.fitted = model.sequence_at(rec.x);
  out.z_diff = zdiff(out.fitted, ref);
  for (int i = 0; i < kVarCount; ++i)
    if (const auto v = model.value_if_defined(rec.x, static_cast<ModelVar>(i)))
      out.variables.push_back({static_cast<ModelVar>(i), *v});
  return out;
}

std::vector<Combination> recovery_candidates(const Catalog& catalog, LineKind kind, const RecoverOptions& options) {
  std::vector<Combination> out;
  for (auto& c : candidate_combinations(kind, catalog)) {
    if (options.n_cond && c.config.n_cond != *options.n_cond) continue;
    if (kind == LineKind::Cable && options.buried && !*options.buried && c.material.name == "Cu") continue;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<FeasibilityResult> recover(const SequenceReference& ref, const Catalog& catalog,
                                       const RecoverOptions& options) {
  ref.check();
  std::vector<Combination> cands = recovery_candidates(catalog, ref.kind, options);
  // Sector conductors have no shunt model.
  if (ref.has_shunt())
    std::erase_if(cands, [](const Combination& c) { return !c.config.strand.K_r.has_value(); });
  if (cands.empty()) fail(ErrorKind::Contract, "no candidate combinations for this reference");

  std::vector<FeasibilityResult> results = parallel_map<FeasibilityResult>(
      static_cast<int>(cands.size()), options.solver.workers,
      [&](int i) { return feasibility(catalog, cands[i], ref, options.solver, options.model); });

  std::stable_sort(results.begin(), results.end(), [](const FeasibilityResult& a, const FeasibilityResult& b) {
    if (a.z_diff != b.z_diff) return a.z_diff < b.z_diff;
    if (a.combination.config.n_cond != b.combination.config.n_cond)
      return a.combination.config.n_cond < b.combination.config.n_cond;
    if (a.combination.config.name != b.combination.config.name)
      return a.combination.config.name < b.combination.config.name;
    return a.combination.material.name < b.combination.material.name;
  });
  return results;
}

const BoundEntry* BoundReport::find(ModelVar v) const {
  for (const auto& e : entries)
    if (e.var == v) return &e;
  return nullptr;
}

const BoundEntry* SlackResult::find(ModelVar v) const {
  for (const auto& e : ranges)
    if (e.var == v) return &e;
  return nullptr;
}

namespace {

// Min and max of each variable for models built by make(objective, var),
// warm-started from a known feasible physical point.
std::vector<BoundEntry> ranges_of(const std::vector<ModelVar>& vars,
                                  const std::function<InverseModel(Objective, ModelVar)>& make,
                                  const VectorXd& warm, const SolverOptions& solver, bool& all_ok) {
  SolverOptions local = solver;
  local.starts = solver.range_starts;
  const int count = static_cast<int>(vars.size()) * 2;
  struct One {
    double value;
    bool ok;
  };
  const auto solved = parallel_map<One>(count, solver.workers, [&](int i) {
    const ModelVar v = vars[i / 2];
    const InverseModel m = make(i % 2 == 0 ? Objective::Minimize : Objective::Maximize, v);
    const SolutionRecord rec = solve(m, local, warm);
    return One{m.value(rec.x, v), rec.status != SolveStatus::Infeasible};
  });
  all_ok = true;
  std::vector<BoundEntry> out;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const One& lo = solved[2 * k];
    const One& hi = solved[2 * k + 1];
    all_ok = all_ok && lo.ok && hi.ok;
    out.push_back({vars[k], std::min(lo.value, hi.value), std::max(lo.value, hi.value)});
  }
  return out;
}

} // namespace

BoundReport tighten_bounds(const Catalog& catalog, const Combination& combination, const SequenceComponents& starred,
                           const SolverOptions& solver, const ModelOptions& model_options,
                           std::optional<VectorXd> warm) {
  const SequenceReference ref = SequenceReference::from(starred, combination.config.kind);
  auto make = [&](Objective obj, ModelVar v) {
    return InverseModel(catalog, combination, ref, {Mode::FixedSequence, obj, v, 0.0}, model_options);
  };
  const InverseModel probe = make(Objective::Minimize, ModelVar::R);
  if (!warm) {
    const SolutionRecord rec = solve(probe, solver);
    if (rec.status == SolveStatus::Infeasible)
      fail(ErrorKind::InconsistentStarred, "no point of " + combination.name() + " attains the starred values");
    warm = probe.physical(rec.x);
  }
  BoundReport report;
  report.combination = combination;
  bool ok = true;
  report.entries = ranges_of(probe.phi(), make, *warm, solver, ok);
  if (!ok) fail(ErrorKind::InconsistentStarred, "fixed-sequence model of " + combination.name() + " is infeasible");
  return report;
}

BandResult min_band(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                    const SolverOptions& solver, const ModelOptions& model_options) {
  const InverseModel phase1(catalog, combination, ref, {Mode::MinDeviation, Objective::MaxDeviation, {}, 0.0},
                            model_options);
  const SolutionRecord rec = solve(phase1, solver);
  // Measured at the point rather than read from the auxiliary variable.
  const SequenceComponents at = phase1.sequence_at(rec.x);
  BandResult out;
  for (Component c : ref.present())
    out.deviation = std::max(out.deviation, std::abs(component_of(at, c) / *ref.get(c) - 1.0));
  out.x = phase1.physical(rec.x);
  return out;
}

SlackResult slack_analysis(const Catalog& catalog, const Combination& combination, const SequenceReference& ref,
                           double beta, const std::vector<ModelVar>& variables, const SolverOptions& solver,
                           const ModelOptions& model_options) {
  if (!(beta >= 0)) fail(ErrorKind::Domain, "slack beta must be nonnegative");
  SlackResult out;
  out.beta = beta;

  const BandResult band = min_band(catalog, combination, ref, solver, model_options);
  out.min_deviation = band.deviation;
  out.feasible = band.deviation <= beta + solver.feasibility_cutoff;
  if (!out.feasible) return out;

  const InverseModel phase1(catalog, combination, ref, {Mode::MinDeviation, Objective::MaxDeviation, {}, 0.0},
                            model_options);
  const std::vector<ModelVar> vars = variables.empty() ? phase1.phi() : variables;
  const VectorXd& warm = band.x;
  bool ok = true;
  if (beta == 0.0) {
    auto make = [&](Objective obj, ModelVar v) {
      return InverseModel(catalog, combination, ref, {Mode::FixedSequence, obj, v, 0.0}, model_options);
    };
    out.ranges = ranges_of(vars, make, warm, solver, ok);
  } else {
    auto make = [&](Objective obj, ModelVar v) {
      return InverseModel(catalog, combination, ref, {Mode::Slack, obj, v, beta}, model_options);
    };
    out.ranges = ranges_of(vars, make, warm, solver, ok);
  }
  if (!ok) {
    out.feasible = false;
    out.ranges.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lifted constraint system

std::vector<Residual> lifted_residuals(const ConfigSpec& config, const MaterialSpec& material, const ImpedanceSet& set,
                                       const CarsonConstants& k) {
  std::vector<Residual> out;
  auto add = [&](std::string name, double v) { out.push_back({std::move(name), v}); };
  auto ij = [](const char* what, int i, int j) {
    return std::string(what) + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
  };
  const ConductorState& s = set.conductor;
  const int n = static_cast<int>(set.coords.x.size());

  add("area", (s.A - config.strand.N * kPi * s.r * s.r) / s.A);
  add("dc resistance", (s.R_dc * s.A - material.rho * (1.0 + material.alpha * (s.T - 20.0))) / material.rho);
  add("ac resistance", (s.R_ac - (1.0 + s.C_s) * (1.0 + s.C_p) * s.R_dc) / s.R_ac);
  add("gmr", (s.GMR - config.strand.K_gmr * s.r) / s.GMR);
  if (config.strand.K_r) {
    add("core radius", (s.R - *config.strand.K_r * s.r) / s.R);
    add("insulated radius", (s.R_nom - s.R - s.t_nom) / s.R_nom);
  }

  const auto& x = set.coords.x;
  const auto& y = set.coords.y;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j], sy = y[i] + y[j];
      const double S = set.distances.S(i, j);
      add(ij("image", i, j), (S * S - dx * dx - sy * sy) / (S * S));
      if (i != j) {
        const double D = set.distances.D(i, j);
        add(ij("distance", i, j), (D * D - dx * dx - dy * dy) / (D * D));
      }
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::complex<double> z = set.Z_carson(i, j);
      if (i == j) {
        add(ij("carson re", i, j), z.real() - (s.R_ac + k.k1));
        add(ij("carson im", i, j), z.imag() - k.k2 * (std::log(1.0 / (k.k3 * s.GMR)) + k.k4));
      } else {
        add(ij("carson re", i, j), z.real() - k.k1);
        add(ij("carson im", i, j), z.imag() - k.k2 * (std::log(1.0 / (k.k3 * set.distances.D(i, j))) + k.k4));
      }
    }

  if (n == 4) {
    // Z_kr * Z_nn = Z_ij * Z_nn - Z_in * Z_nj, free of division.
    const std::complex<double> znn = set.Z_carson(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const std::complex<double> r =
            set.Z_kron(i, j) * znn - (set.Z_carson(i, j) * znn - set.Z_carson(i, 3) * set.Z_carson(3, j));
        add(ij("kron re", i, j), r.real() / std::abs(znn));
        add(ij("kron im", i, j), r.imag() / std::abs(znn));
      }
  }

  const auto& t = transform_matrix();
  auto similarity = [&](const char* what, const ComplexMatrix& abc, const ComplexMatrix& seq) {
    // A * seq - abc * A
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        std::complex<double> r = 0.0;
        for (int m = 0; m < 3; ++m) {
          const std::complex<double> a_im(t.re[i][m], t.im[i][m]);
          const std::complex<double> a_mj(t.re[m][j], t.im[m][j]);
          r += a_im * seq(m, j) - abc(i, m) * a_mj;
        }
        add(ij(what, i, j), std::abs(r));
      }
  };
  similarity("sequence", set.Z_kron, set.Z_012);

  if (set.P) {
    const auto& P = *set.P;
    const auto& C = *set.C;
    const auto& Y = *set.Y;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double expect = i == j ? k.k5 * std::log(set.distances.S(i, i) / s.R)
                                     : k.k5 * std::log(set.distances.S(i, j) / set.distances.D(i, j));
        add(ij("potential", i, j), P(i, j).real() - expect);
        std::complex<double> pc = 0.0;
        for (int m = 0; m < n; ++m) pc += P(i, m) * C(m, j);
        add(ij("capacitance", i, j), std::abs(pc - (i == j ? 1.0 : 0.0)));
        add(ij("admittance", i, j),
            std::abs(Y(i, j) - std::complex<double>(0.0, 2.0 * kPi * k.f_fund * C(i, j).real())) /
                std::max(1.0, std::abs(Y(i, j))));
      }
    similarity("shunt sequence", abc_block(Y), *set.Y_012);
  }
  return out;
}

} // namespace invcarson
