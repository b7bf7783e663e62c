#include "sphstab/special_functions.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "sphstab/errors.hpp"

namespace sphstab {

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: x must be positive");
  return std::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: x must be positive");
  return boost::math::digamma(x);
}

double lower_incomplete_gamma_regularized(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw DomainError("lower_incomplete_gamma_regularized: need a > 0, x >= 0");
  return boost::math::gamma_p(a, x);
}

double axis_moment(int d, int k) {
  if (d < 1 || k < 0) throw DomainError("axis_moment: need d >= 1, k >= 0");
  if (k % 2 == 1) return 0.0;
  const int r = k / 2;
  // m_{2r} = Gamma(r+1/2)/Gamma(1/2) * Gamma((d+1)/2) / Gamma(r+(d+1)/2)
  const double h = 0.5 * (d + 1);
  return std::exp(std::lgamma(r + 0.5) - std::lgamma(0.5) + std::lgamma(h) -
                  std::lgamma(r + h));
}

long long sphere_eigenvalue(int d, int ell) {
  if (d < 1 || ell < 0) throw DomainError("sphere_eigenvalue: bad arguments");
  return static_cast<long long>(ell) * (ell + d - 1);
}

namespace {

// Monic three-term recurrence coefficients beta_n for the probability weight
// c_d (1-z^2)^{d/2-1}: p_{n+1} = (z p_n - sqrt(beta_n) p_{n-1})/sqrt(beta_{n+1})
// in the orthonormal normalization. beta_1 = 1/(d+1) covers the d=1 (0/0)
// degeneracy of the general formula.
double recurrence_beta(int d, int n) {
  if (n == 1) return 1.0 / (d + 1);
  const double nn = n;
  return nn * (nn + d - 2) / ((2 * nn + d - 1) * (2 * nn + d - 3));
}

struct LadderCoeffs {
  std::vector<double> sqrt_beta;  // sqrt(beta_1..beta_L)
};

LadderCoeffs ladder_coeffs(int d, int L) {
  LadderCoeffs c;
  c.sqrt_beta.resize(static_cast<size_t>(L) + 1, 0.0);
  for (int n = 1; n <= L; ++n) c.sqrt_beta[n] = std::sqrt(recurrence_beta(d, n));
  return c;
}

}  // namespace

void gegenbauer_ladder(int d, int L, double z, std::vector<double>& p,
                       std::vector<double>* dp, std::vector<double>* d2p) {
  if (d < 1 || L < 0) throw DomainError("gegenbauer_ladder: bad arguments");
  p.assign(static_cast<size_t>(L) + 1, 0.0);
  if (dp) dp->assign(static_cast<size_t>(L) + 1, 0.0);
  if (d2p) d2p->assign(static_cast<size_t>(L) + 1, 0.0);
  p[0] = 1.0;
  if (L == 0) return;
  const LadderCoeffs c = ladder_coeffs(d, L);
  p[1] = z / c.sqrt_beta[1];
  if (dp) (*dp)[1] = 1.0 / c.sqrt_beta[1];
  for (int n = 1; n < L; ++n) {
    const double a = c.sqrt_beta[n];
    const double b = c.sqrt_beta[n + 1];
    p[n + 1] = (z * p[n] - a * p[n - 1]) / b;
    if (dp) (*dp)[n + 1] = (p[n] + z * (*dp)[n] - a * (*dp)[n - 1]) / b;
    if (d2p)
      (*d2p)[n + 1] = (2.0 * (*dp)[n] + z * (*d2p)[n] - a * (*d2p)[n - 1]) / b;
  }
}

double gegenbauer_eval(int d, int ell, double z) {
  std::vector<double> p;
  gegenbauer_ladder(d, ell, z, p);
  return p[static_cast<size_t>(ell)];
}

namespace {

// p_N and p_N' at z without storing the whole ladder.
void eval_pn(const LadderCoeffs& c, int N, double z, double& pn, double& dpn) {
  double pm1 = 1.0, dm1 = 0.0;
  double p = z / c.sqrt_beta[1];
  double dp = 1.0 / c.sqrt_beta[1];
  if (N == 0) {
    pn = 1.0;
    dpn = 0.0;
    return;
  }
  for (int n = 1; n < N; ++n) {
    const double a = c.sqrt_beta[n];
    const double b = c.sqrt_beta[n + 1];
    const double pnext = (z * p - a * pm1) / b;
    const double dnext = (p + z * dp - a * dm1) / b;
    pm1 = p;
    dm1 = dp;
    p = pnext;
    dp = dnext;
  }
  pn = p;
  dpn = dp;
}

QuadratureRule build_gauss_jacobi(int d, int n) {
  QuadratureRule rule;
  rule.d = d;
  rule.n = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const LadderCoeffs c = ladder_coeffs(d, n);
  const double alpha = 0.5 * d - 1.0;
  const int half = n / 2;

  // Newton from the classical Jacobi initial guess; nodes come out in
  // decreasing order for i = 1..n. Symmetry is enforced exactly.
  for (int i = 1; i <= half + (n % 2); ++i) {
    double x = std::cos(M_PI * (0.5 * alpha + i - 0.25) / (n + alpha + 0.5));
    double pn = 0.0, dpn = 0.0;
    for (int it = 0; it < 100; ++it) {
      eval_pn(c, n, x, pn, dpn);
      const double dx = pn / dpn;
      x -= dx;
      if (x >= 1.0) x = 1.0 - 1e-15;
      if (x <= -1.0) x = -1.0 + 1e-15;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    rule.nodes[static_cast<size_t>(n - i)] = x;
    rule.nodes[static_cast<size_t>(i - 1)] = -x;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(half)] = 0.0;

  // Christoffel weights: w_i = 1 / sum_{k<n} p_k(x_i)^2 (mass-1 measure).
  std::vector<double> ladder;
  for (int i = 0; i < n; ++i) {
    gegenbauer_ladder(d, n - 1, rule.nodes[static_cast<size_t>(i)], ladder);
    double s = 0.0;
    for (double v : ladder) s += v * v;
    rule.weights[static_cast<size_t>(i)] = 1.0 / s;
  }
  // mirror weights exactly
  for (int i = 0; i < half; ++i)
    rule.weights[static_cast<size_t>(n - 1 - i)] = rule.weights[static_cast<size_t>(i)];
  return rule;
}

std::mutex g_jacobi_mutex;
std::map<std::pair<int, int>, std::shared_ptr<const QuadratureRule>> g_jacobi_cache;

}  // namespace

std::shared_ptr<const QuadratureRule> gauss_jacobi_rule(int d, int n) {
  if (d < 1) throw DomainError("gauss_jacobi_rule: d must be >= 1");
  if (n < 1) throw DomainError("gauss_jacobi_rule: order must be >= 1");
  if (n > 2048) throw CapacityError("gauss_jacobi_rule: order cap is 2048");
  std::lock_guard<std::mutex> lock(g_jacobi_mutex);
  auto key = std::make_pair(d, n);
  auto it = g_jacobi_cache.find(key);
  if (it != g_jacobi_cache.end()) return it->second;
  auto rule = std::make_shared<const QuadratureRule>(build_gauss_jacobi(d, n));
  g_jacobi_cache.emplace(key, rule);
  return rule;
}

void hermite_ladder(int K, double x, std::vector<double>& h) {
  if (K < 0) throw DomainError("hermite_ladder: K must be >= 0");
  h.assign(static_cast<size_t>(K) + 1, 0.0);
  h[0] = 1.0;
  if (K == 0) return;
  h[1] = x;
  for (int n = 1; n < K; ++n)
    h[n + 1] = (x * h[n] - std::sqrt(static_cast<double>(n)) * h[n - 1]) /
               std::sqrt(static_cast<double>(n + 1));
}

namespace {

double hermite_n(int n, double x) {
  std::vector<double> h;
  hermite_ladder(n, x, h);
  return h[static_cast<size_t>(n)];
}

HermiteRule build_gauss_hermite(int n) {
  HermiteRule rule;
  rule.n = n;

  // Roots of the orthonormal h_n bracketed by sign changes on a fine grid,
  // then polished by Newton. All roots lie within |x| < 2 sqrt(n) + 2.
  const double xmax = 2.0 * std::sqrt(static_cast<double>(n)) + 2.0;
  const int grid = 40 * n;
  std::vector<double> roots;
  double xa = -xmax;
  double fa = hermite_n(n, xa);
  for (int i = 1; i <= grid; ++i) {
    const double xb = -xmax + 2.0 * xmax * i / grid;
    const double fb = hermite_n(n, xb);
    if (fa == 0.0) roots.push_back(xa);
    if (fa * fb < 0.0) {
      double lo = xa, hi = xb;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = hermite_n(n, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (fa * fm < 0.0)
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xa = xb;
    fa = fb;
  }
  if (static_cast<int>(roots.size()) != n)
    throw ConvergenceError("gauss_hermite_rule: root bracketing failed");

  rule.nodes = roots;
  rule.weights.assign(n, 0.0);
  std::vector<double> h;
  for (int i = 0; i < n; ++i) {
    hermite_ladder(n - 1, rule.nodes[static_cast<size_t>(i)], h);
    double s = 0.0;
    for (double v : h) s += v * v;
    rule.weights[static_cast<size_t>(i)] = 1.0 / s;
  }
  // symmetrize
  for (int i = 0; i < n / 2; ++i) {
    const size_t j = static_cast<size_t>(n - 1 - i);
    const double mag = 0.5 * (std::abs(rule.nodes[static_cast<size_t>(i)]) +
                              std::abs(rule.nodes[j]));
    rule.nodes[static_cast<size_t>(i)] = -mag;
    rule.nodes[j] = mag;
    const double w = 0.5 * (rule.weights[static_cast<size_t>(i)] + rule.weights[j]);
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
  return rule;
}

std::mutex g_hermite_mutex;
std::map<int, std::shared_ptr<const HermiteRule>> g_hermite_cache;

}  // namespace

std::shared_ptr<const HermiteRule> gauss_hermite_rule(int n) {
  if (n < 1) throw DomainError("gauss_hermite_rule: order must be >= 1");
  if (n > 400) throw CapacityError("gauss_hermite_rule: order cap is 400");
  std::lock_guard<std::mutex> lock(g_hermite_mutex);
  auto it = g_hermite_cache.find(n);
  if (it != g_hermite_cache.end()) return it->second;
  auto rule = std::make_shared<const HermiteRule>(build_gauss_hermite(n));
  g_hermite_cache.emplace(n, rule);
  return rule;
}

}  // namespace sphstab
