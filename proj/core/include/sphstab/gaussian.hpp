#pragma once

#include <cstdint>
#include <vector>

namespace sphstab {

// Function on (R, dsigma) held as coefficients in the orthonormal
// probabilists' Hermite basis (1D; the mode-level statements are
// dimension-free).
struct HermiteFn {
  std::vector<double> coeffs;  // c_k, k = 0..K

  int modes() const { return static_cast<int>(coeffs.size()) - 1; }
  double norm2_sq() const;     // sum c_k^2 (Parseval)
  double grad_norm_sq() const; // sum k c_k^2
  double eval(double x) const;
  /// L^p(dsigma) norm by Gauss-Hermite quadrature, order auto-doubled until
  /// two evaluations agree to 1e-9.
  double norm_p(double p) const;
};

/// Ornstein-Uhlenbeck semigroup: coefficient-wise decay c_k -> c_k e^{-kt}.
HermiteFn ou_evolve(const HermiteFn& f, double t);

/// Nelson time t_* = -log(p-1)/2 for p in [1,2); +inf at p = 1.
double nelson_time(double p);

/// Mode coefficient (1-(p-1)^k)/(k(2-p)) for p in [1,2), k >= 1.
double mode_constant(double p, int k);

struct TheoremB1Report {
  double deficit = 0.0;          // ||grad f||^2 - (||f||_2^2-||f||_p^2)/(2-p)
  double rhs = 0.0;              // ((2-p)/2)||grad f||^2
  double margin = 0.0;           // improved-inequality margin (needs a_1 = 0)
  double base_margin = 0.0;      // base interpolation inequality margin
  double gross_margin = 0.0;     // semigroup-decay estimate margin
  double hypercontractivity_margin = 0.0;  // ||f||_p^2 - ||u(t_*)||_2^2
  bool pass = false;
};

/// Audits the improved Gaussian interpolation inequality; requires the
/// first Hermite coefficient to vanish.
TheoremB1Report verify_theorem_b1(const HermiteFn& f, double p);

/// Random coefficient ladder; zero_mode1 enforces the orthogonality
/// condition, positivize shifts the function to keep it positive on the
/// quadrature range.
HermiteFn random_hermite(std::uint64_t seed, int K, bool zero_mode1,
                         bool positivize);

}  // namespace sphstab
