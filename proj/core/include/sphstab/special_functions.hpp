#pragma once

#include <memory>
#include <vector>

namespace sphstab {

/// log Gamma(x) for x > 0, relative error <= 1e-13.
double log_gamma(double x);

/// Digamma psi(x) = Gamma'(x)/Gamma(x) for x > 0, absolute error <= 1e-12.
double digamma(double x);

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a),
/// monotone increasing in x, values in [0,1].
double lower_incomplete_gamma_regularized(double a, double x);

/// Moment of the projected uniform measure on S^d:
/// integral of z^k against nu_d(dz) ~ (1-z^2)^{d/2-1} dz normalized to mass 1.
/// Closed Beta-function form; zero for odd k.
double axis_moment(int d, int k);

// Quadrature rule for the normalized ultraspherical weight
//   c_d (1-z^2)^{d/2-1} dz on (-1,1),  total mass 1.
// Exact for polynomials of degree <= 2n-1.
struct QuadratureRule {
  int d = 0;
  int n = 0;
  std::vector<double> nodes;    // strictly increasing, inside (-1,1)
  std::vector<double> weights;  // positive, sum to 1

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// Gauss rule of order n for dimension d. Cached by (d,n); the cache is safe
/// for concurrent readers. Orders above 2048 raise CapacityError.
std::shared_ptr<const QuadratureRule> gauss_jacobi_rule(int d, int n);

/// Degree-ell zonal mode: the Gegenbauer polynomial with parameter (d-1)/2
/// normalized to unit L^2(nu_d) norm. For d=1 these are the cosine modes of
/// the circle (weight (1-z^2)^{-1/2}).
double gegenbauer_eval(int d, int ell, double z);

/// Values (and optionally first/second derivatives) of the orthonormal ladder
/// p_0..p_L at z. Output vectors are resized to L+1.
void gegenbauer_ladder(int d, int L, double z, std::vector<double>& p,
                       std::vector<double>* dp = nullptr,
                       std::vector<double>* d2p = nullptr);

/// Laplace-Beltrami eigenvalue lambda_ell = ell(ell+d-1), exact in integers.
long long sphere_eigenvalue(int d, int ell);

// Gauss-Hermite rule for the standard Gaussian probability measure
// (2*pi)^{-1/2} e^{-x^2/2} dx on R. Probabilists' normalization, mass 1.
struct HermiteRule {
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached Gauss-Hermite rule; orders above 400 raise CapacityError.
std::shared_ptr<const HermiteRule> gauss_hermite_rule(int n);

/// Orthonormal probabilists' Hermite ladder h_0..h_K at x (unit L^2(dsigma)).
void hermite_ladder(int K, double x, std::vector<double>& h);

}  // namespace sphstab
