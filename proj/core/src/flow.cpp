#include "sphstab/flow.hpp"

#include <algorithm>
#include <cmath>

#include "sphstab/errors.hpp"
#include "sphstab/spectral.hpp"

namespace sphstab {

FlowSolver::FlowSolver(int d, double p, double m, int L, int order)
    : d_(d), p_(p), m_(m), L_(L) {
  if (L < 8) throw DomainError("FlowSolver: degree cap too small");
  if (order < 2 * L) throw DomainError("FlowSolver: order must be >= 2L");
  cdc_ = make_cdc(d, p, m);
  if (cdc_.gamma < 0.0)
    throw DomainError("FlowSolver: m outside the admissible range (gamma < 0)");
  rule_ = gauss_jacobi_rule(d, order);
}

FlowState FlowSolver::make_state(const ZonalFn& initial) const {
  if (initial.dim() != d_) throw DomainError("FlowSolver: dimension mismatch");
  FlowState s;
  s.d = d_;
  s.p = p_;
  s.m = m_;
  s.cdc = cdc_;
  s.rule = rule_;
  s.L = L_;
  // resample onto the solver grid through the coefficient ladder
  const int La = std::min(initial.degree_cap(), L_);
  s.u.assign(static_cast<size_t>(rule_->n), 0.0);
  std::vector<double> ladder;
  for (int i = 0; i < rule_->n; ++i) {
    gegenbauer_ladder(d_, La, rule_->nodes[static_cast<size_t>(i)], ladder);
    double v = 0.0;
    for (int ell = 0; ell <= La; ++ell)
      v += initial.coeffs()[static_cast<size_t>(ell)] * ladder[static_cast<size_t>(ell)];
    s.u[static_cast<size_t>(i)] = v;
  }
  if (*std::min_element(s.u.begin(), s.u.end()) <= 0.0)
    throw DegenerateInputError("FlowSolver: initial profile must be positive");
  // normalize the conserved quantity ||u||_p to 1
  double np = 0.0;
  for (int i = 0; i < rule_->n; ++i)
    np += rule_->weights[static_cast<size_t>(i)] *
          std::pow(s.u[static_cast<size_t>(i)], p_);
  np = std::pow(np, 1.0 / p_);
  for (double& v : s.u) v /= np;
  return s;
}

std::vector<double> FlowSolver::time_derivative(const FlowState& state,
                                                const std::vector<double>& u) const {
  const int n = rule_->n;
  std::vector<double> c(static_cast<size_t>(L_) + 1, 0.0);
  std::vector<double> ladder, dl, d2l;
  for (int i = 0; i < n; ++i) {
    gegenbauer_ladder(d_, L_, rule_->nodes[static_cast<size_t>(i)], ladder);
    const double wv = rule_->weights[static_cast<size_t>(i)] * u[static_cast<size_t>(i)];
    for (int ell = 0; ell <= L_; ++ell) c[static_cast<size_t>(ell)] += wv * ladder[static_cast<size_t>(ell)];
  }
  std::vector<double> rhs(static_cast<size_t>(n), 0.0);
  const double expo = -state.p * (1.0 - state.m);
  for (int i = 0; i < n; ++i) {
    const double z = rule_->nodes[static_cast<size_t>(i)];
    gegenbauer_ladder(d_, L_, z, ladder, &dl, &d2l);
    double up = 0.0, upp = 0.0;
    for (int ell = 1; ell <= L_; ++ell) {
      up += c[static_cast<size_t>(ell)] * dl[static_cast<size_t>(ell)];
      upp += c[static_cast<size_t>(ell)] * d2l[static_cast<size_t>(ell)];
    }
    const double one_minus_z2 = 1.0 - z * z;
    const double ui = u[static_cast<size_t>(i)];
    const double lap = one_minus_z2 * upp - d_ * z * up;
    const double grad_sq = one_minus_z2 * up * up;
    rhs[static_cast<size_t>(i)] =
        std::pow(ui, expo) * (lap + (state.m * state.p - 1.0) * grad_sq / ui);
  }
  return rhs;
}

double FlowSolver::suggested_dt(const FlowState& state) const {
  const double lam_max = lambda_j(d_, L_);
  double fmax = 0.0;
  const double expo = -p_ * (1.0 - m_);
  for (double v : state.u) fmax = std::max(fmax, std::pow(v, expo));
  return 2.0 / (lam_max * fmax);
}

double FlowSolver::step(FlowState& state, double dt) const {
  const int n = rule_->n;
  for (int halving = 0; halving < 40; ++halving) {
    const std::vector<double> k1 = time_derivative(state, state.u);
    std::vector<double> tmp(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = state.u[static_cast<size_t>(i)] + 0.5 * dt * k1[static_cast<size_t>(i)];
    const std::vector<double> k2 = time_derivative(state, tmp);
    for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = state.u[static_cast<size_t>(i)] + 0.5 * dt * k2[static_cast<size_t>(i)];
    const std::vector<double> k3 = time_derivative(state, tmp);
    for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = state.u[static_cast<size_t>(i)] + dt * k3[static_cast<size_t>(i)];
    const std::vector<double> k4 = time_derivative(state, tmp);
    std::vector<double> next(static_cast<size_t>(n));
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      next[static_cast<size_t>(i)] =
          state.u[static_cast<size_t>(i)] +
          dt / 6.0 *
              (k1[static_cast<size_t>(i)] + 2.0 * k2[static_cast<size_t>(i)] +
               2.0 * k3[static_cast<size_t>(i)] + k4[static_cast<size_t>(i)]);
      if (!std::isfinite(next[static_cast<size_t>(i)]) || next[static_cast<size_t>(i)] <= 0.0) ok = false;
    }
    if (ok) {
      state.u = std::move(next);
      state.t += dt;
      return dt;
    }
    dt *= 0.5;
  }
  throw ConvergenceError("FlowSolver::step: positivity lost after maximal halving");
}

FlowSample FlowSolver::sample(const FlowState& state) const {
  FlowSample s;
  s.t = state.t;
  const ZonalFn f = ZonalFn::from_values(d_, rule_, state.u, L_);
  s.entropy = f.entropy(p_);
  s.fisher = f.grad_norm_sq();
  s.deficit = s.fisher - d_ * s.entropy;
  s.norm_p = f.norm_p(p_);
  s.min_u = f.min_value();
  const double np2 = s.norm_p * s.norm_p;
  const double e_scaled = s.entropy / np2;
  s.phi_gap = s.fisher - d_ * np2 * phi_mp(e_scaled, cdc_);
  return s;
}

FlowTrace FlowSolver::run(const ZonalFn& initial, double t_end, double sample_dt) const {
  if (!(t_end > 0.0) || !(sample_dt > 0.0))
    throw DomainError("FlowSolver::run: need positive t_end and sample_dt");
  FlowState state = make_state(initial);
  FlowTrace trace;
  trace.d = d_;
  trace.p = p_;
  trace.m = m_;

  const int n_samples = static_cast<int>(std::round(t_end / sample_dt));
  trace.samples.push_back(sample(state));
  for (int k = 1; k <= n_samples; ++k) {
    const double t_target = k * sample_dt;
    while (state.t < t_target - 1e-13) {
      const double dt = std::min(suggested_dt(state), t_target - state.t);
      step(state, dt);
    }
    trace.samples.push_back(sample(state));
  }

  // audits
  const double np0 = trace.samples.front().norm_p;
  trace.min_u = trace.samples.front().min_u;
  for (const auto& s : trace.samples) {
    trace.mass_drift = std::max(trace.mass_drift, std::abs(s.norm_p - np0) / np0);
    trace.phi_violation = std::max(trace.phi_violation, -s.phi_gap);
    trace.min_u = std::min(trace.min_u, s.min_u);
  }
  for (size_t k = 1; k < trace.samples.size(); ++k)
    trace.deficit_increase = std::max(
        trace.deficit_increase, trace.samples[k].deficit - trace.samples[k - 1].deficit);

  // discrete differential inequality (centered differences at interior samples)
  const double gb2 = cdc_.gamma / (cdc_.beta * cdc_.beta);
  for (size_t k = 1; k + 1 < trace.samples.size(); ++k) {
    const double h = trace.samples[k + 1].t - trace.samples[k - 1].t;
    const double dD = (trace.samples[k + 1].deficit - trace.samples[k - 1].deficit) / h;
    const double de = (trace.samples[k + 1].entropy - trace.samples[k - 1].entropy) / h;
    const double e = trace.samples[k].entropy;
    const double i = trace.samples[k].fisher;
    const double weight =
        (p_ == 2.0) ? 1.0 : std::pow(1.0 - (p_ - 2.0) * e, cdc_.delta);
    const double bound = gb2 * i * de / weight;
    trace.edo_residual = std::max(trace.edo_residual, dD - bound);
  }

  const double i0 = trace.samples.front().fisher;
  const double ie = trace.samples.back().fisher;
  trace.decayed = ie <= 5.0 * i0 * std::exp(-d_ * t_end) + 1e-10;
  return trace;
}

FlowSolver::ImprovedEntropyReport FlowSolver::verify_improved_entropy(
    const ZonalFn& initial, double t_end, double sample_dt,
    const std::vector<double>& theta_grid) const {
  for (double th : theta_grid)
    if (!(th > 0.0) || !(th < 1.0))
      throw DomainError("verify_improved_entropy: theta must be in (0,1)");
  const FlowTrace trace = run(initial, t_end, sample_dt);
  ImprovedEntropyReport rep;
  rep.theta_grid = theta_grid;
  rep.worst_margin.assign(theta_grid.size(), 0.0);
  for (size_t j = 0; j < theta_grid.size(); ++j) {
    CdcParams scaled = cdc_;
    scaled.gamma *= theta_grid[j];
    scaled.zeta *= theta_grid[j];
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& s : trace.samples) {
      const double np2 = s.norm_p * s.norm_p;
      const double barrier = d_ * np2 * phi_mp(s.entropy / np2, scaled);
      worst = std::min(worst, s.fisher - barrier);
    }
    rep.worst_margin[j] = worst;
  }
  const double gb2 = cdc_.gamma / (cdc_.beta * cdc_.beta);
  double worst_quad = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.samples) {
    const double np2 = s.norm_p * s.norm_p;
    const double e = s.entropy / np2;
    worst_quad =
        std::min(worst_quad, (s.fisher - d_ * s.entropy) / np2 - 0.5 * gb2 * d_ * e * e);
  }
  rep.quadratic_margin = worst_quad;
  rep.pass = worst_quad >= -1e-6;
  for (double m : rep.worst_margin) rep.pass = rep.pass && m >= -1e-6;
  return rep;
}

}  // namespace sphstab
