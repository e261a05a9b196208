#include "invcarson/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace invcarson {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void NlpEval::resize(int n, int m_eq, int m_in) {
  grad = VectorXd::Zero(n);
  hess_f = MatrixXd::Zero(n, n);
  c_eq = VectorXd::Zero(m_eq);
  c_in = VectorXd::Zero(m_in);
  jac_eq = MatrixXd::Zero(m_eq, n);
  jac_in = MatrixXd::Zero(m_in, n);
  hess_eq.assign(static_cast<std::size_t>(m_eq), MatrixXd::Zero(n, n));
  hess_in.assign(static_cast<std::size_t>(m_in), MatrixXd::Zero(n, n));
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::Optimal: return "optimal";
  case SolveStatus::Infeasible: return "infeasible";
  case SolveStatus::IterationLimit: return "iteration-limit";
  case SolveStatus::NumericalFailure: return "no-convergence";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(const NlpEval& e) {
  if (!std::isfinite(e.f) || !e.grad.allFinite() || !e.c_eq.allFinite() || !e.c_in.allFinite()) return false;
  return e.jac_eq.allFinite() && e.jac_in.allFinite();
}

double violation_of(const NlpEval& e, const VectorXd& x, const VectorXd& l, const VectorXd& u) {
  double v = 0.0;
  if (e.c_eq.size()) v = std::max(v, e.c_eq.cwiseAbs().maxCoeff());
  for (int i = 0; i < e.c_in.size(); ++i) v = std::max(v, -e.c_in[i]);
  for (int i = 0; i < x.size(); ++i) v = std::max({v, l[i] - x[i], x[i] - u[i]});
  return v;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Iterate {
  VectorXd x, s, y, z, zl, zu;
};

class Ipm {
public:
  Ipm(const NlpProblem& p, const IpmOptions& o) : p_(p), opt_(o) {
    n_ = p.num_vars();
    me_ = p.num_eq();
    mi_ = p.num_ineq();
    l_ = p.lower();
    u_ = p.upper();
    hl_.resize(n_);
    hu_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      hl_[i] = std::isfinite(l_[i]);
      hu_[i] = std::isfinite(u_[i]);
    }
  }

  IpmResult run(const VectorXd& x0) {
    IpmResult res;
    for (int i = 0; i < n_; ++i)
      if (l_[i] > u_[i]) {
        res.status = SolveStatus::Infeasible;
        res.x = x0;
        res.violation = kInf;
        return res;
      }

    Iterate it;
    it.x = push_interior(x0);
    NlpEval ev;
    ev.resize(n_, me_, mi_);
    if (!p_.evaluate(it.x, ev) || !finite(ev)) {
      res.x = it.x;
      res.violation = kInf;
      return res;
    }
    it.s = ev.c_in.cwiseMax(opt_.bound_push);
    it.y = VectorXd::Zero(me_);
    it.z = VectorXd::Ones(mi_);
    it.zl = VectorXd::Zero(n_);
    it.zu = VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (hl_[i]) it.zl[i] = 1.0;
      if (hu_[i]) it.zu[i] = 1.0;
    }

    double mu = opt_.mu_init;
    double nu = 1.0;
    double dw_last = 0.0;
    int ls_failures = 0;

    for (int k = 0; k <= opt_.max_iter; ++k) {
      res.iterations = k;
      const VectorXd dl = dist_lower(it.x), du = dist_upper(it.x);

      // Optimality check at mu = 0, then barrier update.
      const Errors e0 = errors(ev, it, 0.0, dl, du);
      res.x = it.x;
      res.f = ev.f;
      res.violation = violation_of(ev, it.x, l_, u_);
      res.stationarity = e0.dual;
      if (e0.dual <= opt_.tol_stationarity && res.violation <= opt_.tol_feasibility &&
          e0.compl_ <= opt_.tol_complementarity) {
        res.status = SolveStatus::Optimal;
        return res;
      }
      if (k == opt_.max_iter) break;
      while (mu > opt_.mu_min) {
        const Errors em = errors(ev, it, mu, dl, du);
        if (std::max({em.dual, em.primal, em.compl_}) > 10.0 * mu) break;
        mu = std::max(opt_.mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      }

      // Newton system.
      MatrixXd W = ev.hess_f;
      for (int i = 0; i < me_; ++i) W -= it.y[i] * ev.hess_eq[i];
      for (int i = 0; i < mi_; ++i) W -= it.z[i] * ev.hess_in[i];
      const VectorXd sig_s = it.z.cwiseQuotient(it.s);
      VectorXd sig_x = VectorXd::Zero(n_);
      VectorXd bar_x = VectorXd::Zero(n_);
      for (int i = 0; i < n_; ++i) {
        if (hl_[i]) {
          sig_x[i] += it.zl[i] / dl[i];
          bar_x[i] += mu / dl[i];
        }
        if (hu_[i]) {
          sig_x[i] += it.zu[i] / du[i];
          bar_x[i] -= mu / du[i];
        }
      }
      const VectorXd r_in = ev.c_in - it.s;
      MatrixXd H = W;
      H.diagonal() += sig_x;
      if (mi_) H += ev.jac_in.transpose() * sig_s.asDiagonal() * ev.jac_in;
      VectorXd rhs_x = -ev.grad + bar_x;
      if (me_) rhs_x += ev.jac_eq.transpose() * it.y;
      if (mi_) rhs_x += ev.jac_in.transpose() * (mu * it.s.cwiseInverse() - sig_s.cwiseProduct(r_in));

      VectorXd rhs(n_ + me_);
      rhs.head(n_) = rhs_x;
      if (me_) rhs.tail(me_) = -ev.c_eq;

      VectorXd sol;
      double dw = 0.0;
      if (!solve_kkt(H, ev.jac_eq, rhs, mu, dw_last, sol, dw)) break;
      if (dw > 0) dw_last = dw;

      const VectorXd dx = sol.head(n_);
      const VectorXd dy = me_ ? VectorXd(-sol.tail(me_)) : VectorXd();
      const VectorXd ds = mi_ ? VectorXd(ev.jac_in * dx + r_in) : VectorXd();
      const VectorXd dz = mi_ ? VectorXd(mu * it.s.cwiseInverse() - it.z - sig_s.cwiseProduct(ds)) : VectorXd();
      VectorXd dzl = VectorXd::Zero(n_), dzu = VectorXd::Zero(n_);
      for (int i = 0; i < n_; ++i) {
        if (hl_[i]) dzl[i] = mu / dl[i] - it.zl[i] - it.zl[i] / dl[i] * dx[i];
        if (hu_[i]) dzu[i] = mu / du[i] - it.zu[i] + it.zu[i] / du[i] * dx[i];
      }

      const double tau = std::max(0.99, 1.0 - mu);
      double a_pri = 1.0;
      for (int i = 0; i < n_; ++i) {
        if (hl_[i] && dx[i] < 0) a_pri = std::min(a_pri, -tau * dl[i] / dx[i]);
        if (hu_[i] && dx[i] > 0) a_pri = std::min(a_pri, tau * du[i] / dx[i]);
      }
      for (int i = 0; i < mi_; ++i)
        if (ds[i] < 0) a_pri = std::min(a_pri, -tau * it.s[i] / ds[i]);
      double a_dual = 1.0;
      for (int i = 0; i < mi_; ++i)
        if (dz[i] < 0) a_dual = std::min(a_dual, -tau * it.z[i] / dz[i]);
      for (int i = 0; i < n_; ++i) {
        if (hl_[i] && dzl[i] < 0) a_dual = std::min(a_dual, -tau * it.zl[i] / dzl[i]);
        if (hu_[i] && dzu[i] < 0) a_dual = std::min(a_dual, -tau * it.zu[i] / dzu[i]);
      }

      // l1 merit line search.
      const double theta = constraint_norm(ev, it.s);
      VectorXd gphi_x = ev.grad - bar_x;
      double gphi_d = gphi_x.dot(dx);
      if (mi_) gphi_d -= mu * ds.cwiseQuotient(it.s).sum();
      if (theta > 1e-14) {
        const double curv = std::max(0.0, 0.5 * dx.dot((H + dw * MatrixXd::Identity(n_, n_)) * dx));
        const double need = (gphi_d + curv) / (0.9 * theta);
        if (nu < need) nu = need + 1.0;
      }
      // Exact-penalty threshold: nu must dominate the multiplier estimates.
      double mult = 0.0;
      if (me_) mult = std::max(mult, (it.y + dy).cwiseAbs().maxCoeff());
      if (mi_) mult = std::max(mult, (it.z + dz).cwiseAbs().maxCoeff());
      if (nu < 1.1 * mult) nu = 1.1 * mult + 1.0;
      const bool tiny = (dx.cwiseAbs().array() / (1.0 + it.x.cwiseAbs().array())).maxCoeff() < 1e-11 &&
                        (mi_ == 0 || (ds.cwiseAbs().array() / (1.0 + it.s.cwiseAbs().array())).maxCoeff() < 1e-11);
      const double phi0 = merit(ev, it.x, it.s, mu, nu);
      const double dphi = std::min(gphi_d - nu * theta, 0.0);

      double alpha = a_pri;
      bool accepted = false;
      NlpEval trial;
      trial.resize(n_, me_, mi_);
      VectorXd xt, st;
      if (tiny) {
        xt = it.x + alpha * dx;
        st = mi_ ? VectorXd(it.s + alpha * ds) : VectorXd();
        accepted = p_.evaluate(xt, trial) && finite(trial);
      }
      for (int bt = 0; bt < 40 && !accepted; ++bt) {
        xt = it.x + alpha * dx;
        st = mi_ ? VectorXd(it.s + alpha * ds) : VectorXd();
        if (p_.evaluate(xt, trial) && finite(trial)) {
          const double phi = merit(trial, xt, st, mu, nu);
          if (std::isfinite(phi) && phi <= phi0 + 1e-4 * alpha * dphi + 1e-14 * std::abs(phi0)) {
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        if (++ls_failures > 8) break;
        // Take a short step anyway when it is evaluable; it often escapes the
        // stall caused by a poor multiplier estimate.
        alpha = std::min(a_pri, 1e-3);
        xt = it.x + alpha * dx;
        st = mi_ ? VectorXd(it.s + alpha * ds) : VectorXd();
        if (!p_.evaluate(xt, trial) || !finite(trial)) break;
      } else {
        ls_failures = 0;
      }

      it.x = xt;
      it.s = st;
      if (me_) it.y += alpha * dy;
      if (mi_) it.z += a_dual * dz;
      it.zl += a_dual * dzl;
      it.zu += a_dual * dzu;
      ev = std::move(trial);

      // Keep multipliers within a factor of the central path.
      const double kap = 1e10;
      for (int i = 0; i < mi_; ++i) it.z[i] = std::clamp(it.z[i], mu / (kap * it.s[i]), kap * mu / it.s[i]);
      const VectorXd nl = dist_lower(it.x), nu_ = dist_upper(it.x);
      for (int i = 0; i < n_; ++i) {
        if (hl_[i]) it.zl[i] = std::clamp(it.zl[i], mu / (kap * nl[i]), kap * mu / nl[i]);
        if (hu_[i]) it.zu[i] = std::clamp(it.zu[i], mu / (kap * nu_[i]), kap * mu / nu_[i]);
      }
    }

    if (res.status != SolveStatus::Optimal) {
      res.status = res.iterations >= opt_.max_iter ? SolveStatus::IterationLimit : SolveStatus::NumericalFailure;
    }
    return res;
  }

private:
  struct Errors {
    double dual = 0, primal = 0, compl_ = 0;
  };

  VectorXd push_interior(VectorXd x) const {
    for (int i = 0; i < n_; ++i) {
      const double width = hl_[i] && hu_[i] ? u_[i] - l_[i] : kInf;
      if (hl_[i]) {
        const double pl = std::min(opt_.bound_push * std::max(1.0, std::abs(l_[i])), opt_.bound_push * width);
        x[i] = std::max(x[i], l_[i] + pl);
      }
      if (hu_[i]) {
        const double pu = std::min(opt_.bound_push * std::max(1.0, std::abs(u_[i])), opt_.bound_push * width);
        x[i] = std::min(x[i], u_[i] - pu);
      }
    }
    return x;
  }

  VectorXd dist_lower(const VectorXd& x) const {
    VectorXd d = VectorXd::Ones(n_);
    for (int i = 0; i < n_; ++i)
      if (hl_[i]) d[i] = x[i] - l_[i];
    return d;
  }
  VectorXd dist_upper(const VectorXd& x) const {
    VectorXd d = VectorXd::Ones(n_);
    for (int i = 0; i < n_; ++i)
      if (hu_[i]) d[i] = u_[i] - x[i];
    return d;
  }

  Errors errors(const NlpEval& ev, const Iterate& it, double mu, const VectorXd& dl, const VectorXd& du) const {
    VectorXd rd = ev.grad - it.zl + it.zu;
    if (me_) rd -= ev.jac_eq.transpose() * it.y;
    if (mi_) rd -= ev.jac_in.transpose() * it.z;
    double mult = it.y.lpNorm<1>() + it.z.lpNorm<1>() + it.zl.lpNorm<1>() + it.zu.lpNorm<1>();
    const int count = me_ + mi_ + 2 * n_;
    const double smax = 100.0;
    const double sd = std::max(smax, mult / std::max(1, count)) / smax;
    double comp = 0.0, zsum = it.z.lpNorm<1>() + it.zl.lpNorm<1>() + it.zu.lpNorm<1>();
    const double sc = std::max(smax, zsum / std::max(1, mi_ + 2 * n_)) / smax;
    for (int i = 0; i < mi_; ++i) comp = std::max(comp, std::abs(it.s[i] * it.z[i] - mu));
    for (int i = 0; i < n_; ++i) {
      if (hl_[i]) comp = std::max(comp, std::abs(dl[i] * it.zl[i] - mu));
      if (hu_[i]) comp = std::max(comp, std::abs(du[i] * it.zu[i] - mu));
    }
    Errors e;
    e.dual = inf_norm(rd) / sd;
    e.primal = std::max(inf_norm(ev.c_eq), mi_ ? inf_norm(ev.c_in - it.s) : 0.0);
    e.compl_ = comp / sc;
    return e;
  }

  double constraint_norm(const NlpEval& ev, const VectorXd& s) const {
    double t = ev.c_eq.lpNorm<1>();
    if (mi_) t += (ev.c_in - s).lpNorm<1>();
    return t;
  }

  double merit(const NlpEval& ev, const VectorXd& x, const VectorXd& s, double mu, double nu) const {
    double b = 0.0;
    for (int i = 0; i < mi_; ++i) {
      if (s[i] <= 0) return kInf;
      b += std::log(s[i]);
    }
    for (int i = 0; i < n_; ++i) {
      if (hl_[i]) {
        if (x[i] <= l_[i]) return kInf;
        b += std::log(x[i] - l_[i]);
      }
      if (hu_[i]) {
        if (x[i] >= u_[i]) return kInf;
        b += std::log(u_[i] - x[i]);
      }
    }
    return ev.f - mu * b + nu * constraint_norm(ev, s);
  }

  // Solves [H + dw I, J^T; J, -dc I] sol = rhs with inertia correction so the
  // reduced Hessian is positive definite.
  bool solve_kkt(const MatrixXd& H, const MatrixXd& J, const VectorXd& rhs, double mu, double dw_last,
                 VectorXd& sol, double& dw) const {
    const int N = n_ + me_;
    MatrixXd K = MatrixXd::Zero(N, N);
    double dc = 0.0;
    dw = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      K.topLeftCorner(n_, n_) = H;
      K.topLeftCorner(n_, n_).diagonal().array() += dw;
      if (me_) {
        K.topRightCorner(n_, me_) = J.transpose();
        K.bottomLeftCorner(me_, n_) = J;
        K.bottomRightCorner(me_, me_) = -dc * MatrixXd::Identity(me_, me_);
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
      if (es.info() != Eigen::Success) return false;
      const VectorXd& lam = es.eigenvalues();
      const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
      const double eps = 1e-13 * scale;
      int pos = 0, neg = 0, zero = 0;
      for (int i = 0; i < N; ++i) {
        if (lam[i] > eps)
          ++pos;
        else if (lam[i] < -eps)
          ++neg;
        else
          ++zero;
      }
      if (pos == n_ && neg == me_) {
        const VectorXd t = es.eigenvectors().transpose() * rhs;
        sol = es.eigenvectors() * t.cwiseQuotient(lam);
        return sol.allFinite();
      }
      if (zero > 0 && me_ > 0 && dc == 0.0) {
        dc = 1e-8 * std::pow(mu, 0.25);
        continue;
      }
      if (dw == 0.0) {
        dw = dw_last == 0.0 ? 1e-4 : std::max(1e-20, dw_last / 3.0);
      } else {
        dw *= dw_last == 0.0 ? 100.0 : 8.0;
      }
      if (dw > 1e40) return false;
    }
    return false;
  }

  const NlpProblem& p_;
  IpmOptions opt_;
  int n_ = 0, me_ = 0, mi_ = 0;
  VectorXd l_, u_;
  std::vector<bool> hl_, hu_;
};

} // namespace

IpmResult solve_ipm(const NlpProblem& problem, const VectorXd& x0, const IpmOptions& options) {
  return Ipm(problem, options).run(x0);
}

double constraint_violation(const NlpProblem& problem, const VectorXd& x) {
  NlpEval ev;
  ev.resize(problem.num_vars(), problem.num_eq(), problem.num_ineq());
  if (!problem.evaluate(x, ev) || !finite(ev)) return kInf;
  return violation_of(ev, x, problem.lower(), problem.upper());
}

std::vector<std::vector<double>> halton_points(int dim, int count, std::uint64_t seed) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::mt19937_64 rng(seed);
  std::vector<double> shift(static_cast<std::size_t>(dim));
  for (auto& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      const int b = kPrimes[d % 16];
      double f = 1.0, v = 0.0;
      for (int i = k; i > 0; i /= b) {
        f /= b;
        v += f * (i % b);
      }
      v += shift[static_cast<std::size_t>(d)];
      p[static_cast<std::size_t>(d)] = v - std::floor(v);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

MultiStartResult multi_start(const NlpProblem& problem, const std::vector<VectorXd>& starts,
                             const IpmOptions& options, double cutoff, int warm_count) {
  IpmOptions warm = options;
  warm.bound_push = options.warm_bound_push;
  warm.mu_init = std::min(options.mu_init, options.warm_mu_init);
  MultiStartResult out;
  bool have = false;
  auto better = [&](const IpmResult& a, const IpmResult& b) {
    const bool fa = a.violation <= cutoff, fb = b.violation <= cutoff;
    if (fa != fb) return fa;
    if (!fa) return a.violation < b.violation;
    const bool oa = a.status == SolveStatus::Optimal, ob = b.status == SolveStatus::Optimal;
    const double tol = 1e-10 * std::max(1.0, std::abs(b.f));
    if (oa != ob && std::abs(a.f - b.f) <= 1e-8 * std::max(1.0, std::abs(b.f))) return oa;
    return a.f < b.f - tol;
  };
  for (std::size_t i = 0; i < starts.size(); ++i) {
    IpmResult r = solve_ipm(problem, starts[i], static_cast<int>(i) < warm_count ? warm : options);
    ++out.starts;
    if (r.status == SolveStatus::Optimal) ++out.converged;
    if (!have || better(r, out.best)) {
      out.best = std::move(r);
      have = true;
    }
  }
  return out;
}

DerivativeCheck check_derivatives(const NlpProblem& problem, const VectorXd& x, double h) {
  const int n = problem.num_vars(), me = problem.num_eq(), mi = problem.num_ineq();
  NlpEval base, ep, em;
  base.resize(n, me, mi);
  ep.resize(n, me, mi);
  em.resize(n, me, mi);
  problem.evaluate(x, base);
  DerivativeCheck dc;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (int j = 0; j < n; ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    problem.evaluate(xp, ep);
    problem.evaluate(xm, em);
    dc.max_grad_error = std::max(dc.max_grad_error, rel((ep.f - em.f) / (2 * step), base.grad[j]));
    for (int i = 0; i < me; ++i)
      dc.max_jac_error = std::max(dc.max_jac_error, rel((ep.c_eq[i] - em.c_eq[i]) / (2 * step), base.jac_eq(i, j)));
    for (int i = 0; i < mi; ++i)
      dc.max_jac_error = std::max(dc.max_jac_error, rel((ep.c_in[i] - em.c_in[i]) / (2 * step), base.jac_in(i, j)));
    for (int k = 0; k < n; ++k) {
      dc.max_hess_error =
          std::max(dc.max_hess_error, rel((ep.grad[k] - em.grad[k]) / (2 * step), base.hess_f(k, j)));
      for (int i = 0; i < me; ++i)
        dc.max_hess_error = std::max(
            dc.max_hess_error, rel((ep.jac_eq(i, k) - em.jac_eq(i, k)) / (2 * step), base.hess_eq[i](k, j)));
      for (int i = 0; i < mi; ++i)
        dc.max_hess_error = std::max(
            dc.max_hess_error, rel((ep.jac_in(i, k) - em.jac_in(i, k)) / (2 * step), base.hess_in[i](k, j)));
    }
  }
  return dc;
}

} // namespace invcarson
