#pragma once

#include <string>

namespace sphstab {

// Parameter pack of the diffusion-flow improvement machinery. Built by
// make_cdc; the consistency relations between the fields are invariants.
struct CdcParams {
  int d = 1;
  double p = 2.0;
  double m = 1.0;      // diffusion exponent (m=1: heat flow)
  double beta = 1.0;   // 2/(2 - p(1-m))
  double gamma = 0.0;  // improvement coefficient, beta-form
  double delta = 1.0;  // 1 + (m-1)p^2/(4(p-2)); 1 on the heat branch
  double zeta = 0.0;   // exponential-rate parameter (ODE-consistent value)
  double kappa = 1.0;  // beta(p-2)+1
  double s_star = 0.0; // 1/(p-2) for p>2, +inf otherwise

  // The Appendix C.4 parenthetical value 2 gamma/(beta(1-beta)); differs from
  // the ODE-consistent zeta by a factor p. Reported, never used in formulas.
  double zeta_appendix_variant = 0.0;
};

CdcParams make_cdc(int d, double p, double m);

/// Canonical admissible fast-diffusion exponent (p+2)/(2p).
double canonical_m(double p);

/// Heat-flow improvement coefficient:
/// ((d-1)/(d+2))^2 (p-1)(2#-p) for d >= 2 (requires 1 <= p <= 2#),
/// (p-1)/3 for d = 1.
double gamma_heat(int d, double p);

/// The p = 2 constant as printed in the literature statement
/// ((4d-1)(d-1)^2/(d+2)^2 for d >= 2); disagrees with gamma_heat(d,2) =
/// (4d-1)/(d+2)^2 by (d-1)^2. Reported alongside, never used in audits.
double gamma_heat_lsi_literature(int d);

/// Solves gamma_heat(d, p) = 2 - p: 7/4 for d = 1, closed form for d >= 2.
double p_star(int d);

struct MRange {
  double m_minus = 0.0;  // quoted closed form (radical without the factor 2)
  double m_plus = 0.0;
  // The actual roots of gamma(m) = 0 carry twice the radical; [m-, m+] is a
  // strict sub-interval of {gamma >= 0}, so every m in it is admissible.
  double gamma_root_minus = 0.0;
  double gamma_root_plus = 0.0;
  double lo = 0.0;  // admissible interval actually usable (intersection)
  double hi = 0.0;
  std::string description;
};

/// Admissible m interval for p in (2, 2*). With strict_reading (default) the
/// set is [m-, m+] cut by {2/p <= m < 1} for p < 4 and by {m < 1} for p >= 4;
/// the relaxed reading keeps [m-, m+] unmodified for p >= 4.
MRange m_range(int d, double p, bool strict_reading = true);

/// gamma as a function of m (beta-form after the m<->beta conversion);
/// reduces to gamma_heat at m = 1 and vanishes at m = m_±.
double gamma_m(int d, double p, double m);

/// The coefficient-polynomial route (negated relative to the printed
/// formula, which has an overall sign slip); cross-check oracle for gamma_m.
double gamma_m_coefficient_poly(int d, double p, double m);

/// Heat-flow improvement function phi (three closed-form branches). Only
/// defined on [0, s_star).
double phi(double s, int d, double p);
/// phi with an overridden gamma (barrier functions scale gamma by theta).
double phi_gamma(double s, double p, double gamma);

/// Fast-diffusion/porous-medium improvement function phi_{m,p} by adaptive
/// quadrature of the closed integrand; absolute error <= 1e-10.
double phi_mp(double s, const CdcParams& cdc);

/// psi(t) = t - phi^{-1}(t) (heat branch), inversion tolerance 1e-11.
double psi(double t, int d, double p);
double psi_gamma(double t, double p, double gamma);
/// Same for phi_{m,p}. For m<1 phi_{m,p} is bounded on [0,s*); beyond its
/// range the inverse saturates at the evaluation cap s*(1-1e-6).
double psi_mp(double t, const CdcParams& cdc);

/// Deficit form of the Frank-type inequality:
/// phi_c(s) = d/(2(1-c)) (2cs - s* + sqrt(s*^2 + 4cs(s-s*))).
double phi_c(double s, double c, int d, double p);

struct FrankResult {
  double c_lower = 0.0;
  double c_upper = 0.0;
  double m_witness = 0.0;
};

/// Constructive Frank constant: largest c (bisection) such that some
/// admissible m dominates, phi_c(s) <= d(phi_{m,p}(s) - s) on [0, s_cap];
/// c_upper is the closed-form optimality bound (p-1)(d+p)/(2(p-2)(d+3)).
FrankResult frank_constant(int d, double p, int m_grid = 64, int s_grid = 256);

}  // namespace sphstab
