#include "sphstab/spectral.hpp"

#include <cmath>

#include "sphstab/errors.hpp"
#include "sphstab/special_functions.hpp"

namespace sphstab {

double two_star(int d) {
  if (d >= 3) return 2.0 * d / (d - 2.0);
  return std::numeric_limits<double>::infinity();
}

double two_sharp(int d) {
  if (d >= 2) return (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0));
  return std::numeric_limits<double>::infinity();
}

Params::Params(int d_, double p_) : d(d_), p(p_) {
  if (d < 1) throw DomainError("Params: d must be >= 1");
  if (!(p >= 1.0) || !(p < sphstab::two_star(d)))
    throw DomainError("Params: need 1 <= p < 2*");
}

double Params::two_star() const { return sphstab::two_star(d); }
double Params::two_sharp() const { return sphstab::two_sharp(d); }

namespace {

void check_x(int d, double x) {
  const double lo = (d >= 2) ? 0.5 * (d - 2.0) : 0.0;
  if (!(x > lo) || !(x <= d))
    throw DomainError("gamma_ratio: x outside admissible interval");
}

}  // namespace

double gamma_ratio(const Params& params, int j, double x) {
  const int d = params.d;
  check_x(d, x);
  if (j < 1) throw DomainError("gamma_ratio: j must be >= 1");
  if (x == static_cast<double>(d)) return 0.0;  // Gamma(d-x) pole
  return std::exp(log_gamma(x) + log_gamma(j + d - x) - log_gamma(d - x) -
                  log_gamma(x + j));
}

double zeta_j(const Params& params, int j) {
  if (params.p == 2.0)
    throw DomainError("zeta_j: p = 2 is the logarithmic case, use eta_j");
  return (gamma_ratio(params, j, params.d / params.p) - 1.0) / (params.p - 2.0);
}

double eta_j(int d, int j) {
  if (d < 1 || j < 1) throw DomainError("eta_j: bad arguments");
  return digamma(j + 0.5 * d) - digamma(0.5 * d);
}

double lambda_j(int d, int j) {
  return static_cast<double>(sphere_eigenvalue(d, j));
}

XiTriple xi_family(const Params& params, int j, double x) {
  const int d = params.d;
  check_x(d, x);
  if (j < 2) throw DomainError("xi_family: j must be >= 2");
  XiTriple t{};
  const double lam = lambda_j(d, j);
  t.xi = std::abs(gamma_ratio(params, j, x) - 1.0) / lam;
  t.xi_star = std::abs(d - 2.0 * x) /
              (static_cast<double>(j) * (j + d) * (2.0 * x - d + 2.0) + d * x);
  t.h = lam * (j + d - x) / ((j + 1.0) * (j + d) * (j + x));
  return t;
}

double improved_constant_k1(int d, double p) {
  return (2.0 * d - p * (d - 2.0)) / (2.0 * (d + p));
}

double improved_constant(const Params& params, int k) {
  if (k < 1) throw DomainError("improved_constant: k must be >= 1");
  const int d = params.d;
  const double denom = (k + 1.0) * (k + d);
  if (params.is_log_case())
    return 1.0 - 0.5 * d * d * eta_j(d, k + 1) / denom;
  return 1.0 - d * zeta_j(params, k + 1) / denom;
}

TailCertificate zeta_over_lambda_sup(const Params& params, int j_max) {
  if (j_max < 3) throw DomainError("zeta_over_lambda_sup: j_max too small");
  TailCertificate cert;
  const bool log_case = params.is_log_case();
  const double x = params.d / params.p;
  double prev_xi = 0.0;
  for (int j = 2; j <= j_max; ++j) {
    const double v = log_case ? 0.5 * params.d * eta_j(params.d, j) / lambda_j(params.d, j)
                              : zeta_j(params, j) / lambda_j(params.d, j);
    if (v > cert.sup_value) {
      cert.sup_value = v;
      cert.attained_j = j;
    }
    if (j == j_max && !log_case) {
      const double xi = xi_family(params, j, x).xi;
      cert.tail_monotone = xi <= prev_xi;
    } else if (!log_case && j >= 2) {
      prev_xi = xi_family(params, j, x).xi;
    }
  }
  if (log_case) {
    // eta_j/lambda_j is strictly decreasing, so the finite check certifies.
    cert.tail_monotone = true;
  }
  return cert;
}

}  // namespace sphstab
