#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sphstab/special_functions.hpp"

namespace sphstab {

// A zonal function on S^d: F(x) = f(x . nu), held both as grid values on a
// Gauss-Jacobi rule and as a coefficient ladder in the orthonormal Gegenbauer
// basis. Immutable after construction; the two representations are
// synchronized at construction time.
class ZonalFn {
 public:
  /// From a coefficient ladder c_0..c_L. Quadrature order defaults to
  /// 2(L+1)+8 so products of two ladder elements integrate exactly.
  static ZonalFn from_coeffs(int d, std::vector<double> coeffs, int order = 0);

  /// From a smooth profile z -> f(z); the degree cap starts at L0 and doubles
  /// until the tail energy falls below tail_tol (default 1e-10).
  static ZonalFn from_profile(int d, const std::function<double(double)>& f,
                              int L0 = 64, double tail_tol = 1e-10);

  /// From grid values on the given rule, analyzed up to degree L.
  static ZonalFn from_values(int d, std::shared_ptr<const QuadratureRule> rule,
                             std::vector<double> values, int L);

  int dim() const { return d_; }
  int degree_cap() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::vector<double>& values() const { return values_; }
  const QuadratureRule& rule() const { return *rule_; }
  std::shared_ptr<const QuadratureRule> rule_ptr() const { return rule_; }

  /// Grid-vs-ladder round-trip residual recorded at construction.
  double sync_residual() const { return sync_residual_; }
  /// L^2 energy beyond the ladder (quadrature norm minus Parseval sum).
  double tail_energy() const { return tail_energy_; }

  double min_value() const;
  bool is_positive() const { return min_value() > 0.0; }

  /// L^q(d mu) norm, q >= 1.
  double norm_p(double q) const;
  double norm2_sq() const;
  /// ||grad F||_2^2 = sum lambda_ell c_ell^2 (spectral route).
  double grad_norm_sq() const;
  /// Same by quadrature of (1-z^2) f'(z)^2 (cross-check route).
  double grad_norm_sq_quadrature() const;

  /// Generalized entropy E_p[F]; the log branch is used when |p-2| < 1e-8.
  double entropy(double p) const;

  /// Projection onto degrees 1..k.
  ZonalFn project(int k) const;
  /// Pi_0 F = mean.
  double mean() const { return coeffs_[0]; }

  /// Values of f' on the grid via the derivative ladder.
  std::vector<double> derivative_values() const;
  std::vector<double> second_derivative_values() const;

  std::string to_json() const;
  static ZonalFn from_json(const std::string& text);

 private:
  ZonalFn() = default;
  void synthesize();  // coeffs -> values (+residual bookkeeping)

  int d_ = 1;
  std::shared_ptr<const QuadratureRule> rule_;
  std::vector<double> values_;
  std::vector<double> coeffs_;
  double sync_residual_ = 0.0;
  double tail_energy_ = 0.0;
};

/// Named test families; eps scales the perturbation families.
///   one_plus_eps_axis : 1 + eps x.nu
///   Y                 : sqrt((d+1)/d) x.nu            (unit gradient norm)
///   Y2                : Y^2 - 1/d                     (degree-2 eigenmode)
///   Y3                : Y^3 - 3(d+1)/(d(d+3)) Y       (degree-3 eigenmode)
ZonalFn test_family(const std::string& name, int d, double eps = 0.0);

/// Random ladder supported on degrees [k_min, L/2], unit gradient norm.
ZonalFn random_highmode(int d, std::uint64_t seed, int k_min, int L = 48);

}  // namespace sphstab
