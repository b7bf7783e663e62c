#pragma once

#include <limits>

namespace sphstab {

// Ambient configuration: dimension d and interpolation exponent p with the
// derived critical exponents.
struct Params {
  int d = 1;
  double p = 2.0;

  Params(int d_, double p_);

  /// Critical Sobolev exponent 2d/(d-2), +inf for d <= 2.
  double two_star() const;
  /// Bakry-Emery exponent (2d^2+1)/(d-1)^2, +inf for d = 1.
  double two_sharp() const;
  /// |p - 2| below this radius is treated as the logarithmic case.
  bool is_log_case() const { return p == 2.0; }
};

double two_star(int d);
double two_sharp(int d);

/// gamma_j(x) = Gamma(x)Gamma(j+d-x)/(Gamma(d-x)Gamma(x+j)), computed in
/// log space. Admissible x in ((d-2)/2, d] for d >= 2, (0, d] for d = 1;
/// gamma_j(d) = 0 (the p = 1 endpoint).
double gamma_ratio(const Params& params, int j, double x);

/// zeta_j(p) = (gamma_j(d/p) - 1)/(p - 2) for p != 2.
double zeta_j(const Params& params, int j);

/// eta_j = psi(j + d/2) - psi(d/2) (the p -> 2 limit ladder).
double eta_j(int d, int j);

/// lambda_j = j(j+d-1) as double (exact for all practical j).
double lambda_j(int d, int j);

struct XiTriple {
  double xi;       // |gamma_j(x)-1| / lambda_j
  double xi_star;  // |d-2x| / (j(j+d)(2x-d+2) + dx)
  double h;        // j(j+d-1)(j+d-x) / ((j+1)(j+d)(j+x)), in (0,1)
};

/// The induction triple of the monotonicity proof, j >= 2.
XiTriple xi_family(const Params& params, int j, double x);

/// Improved inequality constant:
///   C_{d,p,k} = 1 - d zeta_{k+1}(p) / ((k+1)(k+d))        (p != 2)
///   C_{d,2,k} = 1 - d^2 eta_{k+1} / (2 (k+1)(k+d))        (p  = 2)
/// The p = 2 normalization is the p->2 limit of the first formula
/// (zeta_j(p) -> (d/2) eta_j), which matches C_{d,2,1} = 2/(d+2).
double improved_constant(const Params& params, int k);

/// Closed form for k = 1: (2d - p(d-2)) / (2(d+p)).
double improved_constant_k1(int d, double p);

struct TailCertificate {
  double sup_value = 0.0;  // sup over 2 <= j <= j_max of zeta_j/lambda_j
  int attained_j = 0;
  bool tail_monotone = false;  // xi_j decreasing at j_max (sound tail bound)
};

/// Certifies sup_{j>=2} zeta_j(p)/lambda_j numerically up to j_max plus a
/// monotonicity flag for the tail.
TailCertificate zeta_over_lambda_sup(const Params& params, int j_max = 200);

}  // namespace sphstab
