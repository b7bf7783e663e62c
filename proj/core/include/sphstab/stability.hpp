#pragma once

#include <string>
#include <vector>

#include "sphstab/zonal.hpp"

namespace sphstab {

// Closed-form moments of the axis eigenmode families.
struct MomentTable {
  double y_l2_sq;    // ||Y||_2^2   = 1/d
  double y_l4_4;     // ||Y||_4^4   = 3(d+1)/((d+3)d^2)
  double y_l6_6;     // ||Y||_6^6   = 15(d+1)^2/((d+3)(d+5)d^2)
  double y2_l2_sq;   // ||Y2||_2^2  = 2/(d(d+3))
  double y2_grad_sq; // ||grad Y2||_2^2 = 4(d+1)/(d(d+3))
  double y3_l2_sq;   // ||Y3||_2^2  = 6(d+1)^2/((d+5)(d+3)^2 d^2)
  double y3_grad_sq; // ||grad Y3||_2^2 = 18(d+2)(d+1)^2/((d+5)(d+3)^2 d^2)
  double c3;         // (d+1)/(d(d+3)) sqrt(2/((d+2)(d+5)))
};

MomentTable moment_table(int d);

// Taylor-expansion constants of the global proof.
struct TaylorConstants {
  double a = 0.0;          // p(p-1)/(2d)
  double b = 0.0;          // (1/4)(p-2)(p-3)(d+1)/(d(d+3)) a
  double c_p_plus = 0.0;   // extrema of the sixth-order remainder ratio
  double c_p_minus = 0.0;
  double c_pd_plus = 0.0;  // ||Y||_6^6-scaled versions
  double c_pd_minus = 0.0;
  double r_plus = 0.0;     // certified eps^6 coefficient, ||u||_p^2 upper bound
  double r_minus = 0.0;    // same for ||u||_p^{2-p}
  double r_plus_paper = 0.0;  // verbatim display value (reported only)
  double r_quartic = 0.0;  // two-sided quartic remainder bound of (1+s)^{p-1}
  double K_p = 1.0;
  double C_pd = 0.0;       // 1/(2(d+1)) + p(p-2)/(2(d+p))
  double q_aux = 3.0;      // auxiliary exponent for the p <= 2 remainders
  double kappa_q = 0.0;    // certified |s|^q remainder constant (p <= 2)
  double R_pd = 0.0;       // sum of remainder-ledger coefficients
};

TaylorConstants taylor_constants(int d, double p);

struct QuadraticForm {
  double A = 0.0;  // (p-1)(d+p)/(2d(d+3))
  double B = 0.0;  // d(p-1)/sqrt(d(d+1)(d+3))
  double C = 0.0;  // (d+2)/(2(d+1))
  double discriminant = 0.0;  // B^2-4AC
  double lambda = 0.0;        // smallest eigenvalue: the usable constant
  double lambda_max = 0.0;    // largest eigenvalue (the printed formula)
};

QuadraticForm quadratic_form(int d, double p);

// One bounded remainder monomial |coef| eps^i eta^j, folded into the theta
// budget of the A- or C-direction (SPLIT contributes half to each).
struct LedgerTerm {
  double coef = 0.0;
  int eps_pow = 0;
  double eta_pow = 0.0;  // fractional for the eta^p / eta^q terms
  double theta_pow = 0.0;
  int target = 0;  // 0 = A-direction, 1 = C-direction, 2 = split
  std::string what;
};

struct StabilityBreakdown {
  int d = 1;
  double p = 2.0;
  MomentTable moments{};
  TaylorConstants taylor{};
  QuadraticForm form{};
  std::vector<LedgerTerm> ledger;
  double theta_pd = 0.0;        // budget root: max(D_A,D_C)(theta) = lambda/2
  double theta_bar = 0.0;       // min(d/2, 1/4, theta_pd)
  double theta_tilde_max = 0.0; // induced cap on ||grad F||_2^2
  double theta0 = 0.0;          // carre-du-champ branch threshold
  double m = 1.0;               // diffusion exponent used (p > 2)
  double branch_cdc = 0.0;      // (d/theta0) psi(theta0/d)
  double branch_taylor = 0.0;   // lambda/2
  double S = 0.0;               // min of the branches
  double S_var_l2 = 0.0;        // ||grad F||^2+||F||_2^2 denominator variant
  double S_var_p2 = 0.0;        // p=2 variant: ||grad F||^2+(d/2)||F||_2^2
  std::string branch;
};

/// Assembles the global stability constant; dispatches on p (p in (1,2*)).
StabilityBreakdown assemble_S(int d, double p);
/// The p in (1,2] pipeline (simplified expansions, heat-branch psi).
StabilityBreakdown assemble_S_small_p(int d, double p);

/// D_A / D_C budgets of a breakdown at a given theta (exposed for tests).
double ledger_budget_a(const StabilityBreakdown& b, double theta);
double ledger_budget_c(const StabilityBreakdown& b, double theta);

struct GlobalAuditReport {
  double deficit = 0.0;
  double rhs_main = 0.0;  // Theorem-4.1 denominator ||grad F||^2 + ||F||_p^2
  double rhs_l2 = 0.0;    // ||grad F||^2 + ||F||_2^2 variant
  double rhs_p2 = 0.0;    // p = 2 (d/2)||F||_2^2 variant (0 when p != 2)
  double margin_main = 0.0;
  double margin_l2 = 0.0;
  double margin_p2 = 0.0;
  bool pass = false;
};

/// Audits the assembled inequality on a zonal function (F is normalized to
/// ||F||_2 = 1 internally; the audit is homogeneity-invariant).
GlobalAuditReport audit_global(const ZonalFn& f, double p);
GlobalAuditReport audit_global(const ZonalFn& f, double p,
                               const StabilityBreakdown& breakdown);

/// Full breakdown as JSON (sorted keys, 17-significant-digit numbers).
std::string breakdown_to_json(const StabilityBreakdown& b);

}  // namespace sphstab
