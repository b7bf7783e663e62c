#include "sphstab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sphstab/errors.hpp"
#include "sphstab/rng.hpp"
#include "sphstab/special_functions.hpp"

namespace sphstab {

double HermiteFn::norm2_sq() const {
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  return s;
}

double HermiteFn::grad_norm_sq() const {
  double s = 0.0;
  for (size_t k = 1; k < coeffs.size(); ++k) s += static_cast<double>(k) * coeffs[k] * coeffs[k];
  return s;
}

double HermiteFn::eval(double x) const {
  std::vector<double> h;
  hermite_ladder(modes(), x, h);
  double s = 0.0;
  for (size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * h[k];
  return s;
}

double HermiteFn::norm_p(double p) const {
  if (!(p >= 1.0)) throw DomainError("HermiteFn::norm_p: p must be >= 1");
  double prev = -1.0;
  for (int n = 64; n <= 400; n *= 2) {
    auto rule = gauss_hermite_rule(std::min(n, 400));
    double s = 0.0;
    std::vector<double> h;
    for (int i = 0; i < rule->n; ++i) {
      hermite_ladder(modes(), rule->nodes[static_cast<size_t>(i)], h);
      double v = 0.0;
      for (size_t k = 0; k < coeffs.size(); ++k) v += coeffs[k] * h[k];
      s += rule->weights[static_cast<size_t>(i)] * std::pow(std::abs(v), p);
    }
    const double val = std::pow(s, 1.0 / p);
    if (prev >= 0.0 && std::abs(val - prev) <= 1e-9 * (1.0 + val)) return val;
    prev = val;
  }
  return prev;
}

HermiteFn ou_evolve(const HermiteFn& f, double t) {
  if (!(t >= 0.0)) throw DomainError("ou_evolve: t must be >= 0");
  HermiteFn g = f;
  for (size_t k = 1; k < g.coeffs.size(); ++k)
    g.coeffs[k] *= std::exp(-static_cast<double>(k) * t);
  return g;
}

double nelson_time(double p) {
  if (!(p >= 1.0) || !(p < 2.0)) throw DomainError("nelson_time: need p in [1,2)");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return -0.5 * std::log(p - 1.0);
}

double mode_constant(double p, int k) {
  if (!(p >= 1.0) || !(p < 2.0) || k < 1)
    throw DomainError("mode_constant: need p in [1,2), k >= 1");
  return (1.0 - std::pow(p - 1.0, k)) / (k * (2.0 - p));
}

TheoremB1Report verify_theorem_b1(const HermiteFn& f, double p) {
  if (!(p >= 1.0) || !(p < 2.0))
    throw DomainError("verify_theorem_b1: need p in [1,2)");
  if (f.coeffs.size() > 1 && f.coeffs[1] != 0.0)
    throw DomainError("verify_theorem_b1: first Hermite coefficient must vanish");
  TheoremB1Report r;
  const double n2 = f.norm2_sq();
  const double np = f.norm_p(p);
  const double grad = f.grad_norm_sq();
  const double entropy_like = (n2 - np * np) / (2.0 - p);
  r.base_margin = grad - entropy_like;
  r.deficit = grad - entropy_like;
  r.rhs = 0.5 * (2.0 - p) * grad;
  r.margin = r.deficit - r.rhs;

  const double ts = nelson_time(p);
  const HermiteFn u = ou_evolve(f, ts);
  const double decayed = n2 - u.norm2_sq();
  r.gross_margin = 0.5 * (1.0 - std::exp(-4.0 * ts)) * grad - decayed;
  r.hypercontractivity_margin = np * np - u.norm2_sq();
  r.pass = r.margin >= -1e-9 && r.base_margin >= -1e-9 && r.gross_margin >= -1e-9;
  return r;
}

HermiteFn random_hermite(std::uint64_t seed, int K, bool zero_mode1, bool positivize) {
  if (K < 2) throw DomainError("random_hermite: need K >= 2");
  Rng rng(seed);
  HermiteFn f;
  f.coeffs.assign(static_cast<size_t>(K) + 1, 0.0);
  for (int k = 1; k <= K; ++k) f.coeffs[static_cast<size_t>(k)] = rng.normal() / (1.0 + k * k);
  if (zero_mode1) f.coeffs[1] = 0.0;
  if (positivize) {
    // 1 + scaled perturbation, kept above 0.3 over the quadrature range
    auto rule = gauss_hermite_rule(400);
    f.coeffs[0] = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (double x : rule->nodes) mn = std::min(mn, f.eval(x));
    if (mn < -0.7)
      for (double& c : f.coeffs) c *= 0.7 / (-mn);
    f.coeffs[0] = 1.0;
  } else {
    f.coeffs[0] = rng.normal();
  }
  return f;
}

}  // namespace sphstab
