#include "sphstab/carre_du_champ.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sphstab/errors.hpp"
#include "sphstab/spectral.hpp"

namespace sphstab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSCapFactor = 1.0 - 1e-6;  // evaluation cap at s_star
}  // namespace

double canonical_m(double p) {
  if (!(p > 2.0)) throw DomainError("canonical_m: p must be > 2");
  return (p + 2.0) / (2.0 * p);
}

double gamma_heat(int d, double p) {
  if (d < 1) throw DomainError("gamma_heat: d must be >= 1");
  if (d == 1) {
    if (!(p >= 1.0)) throw DomainError("gamma_heat: p must be >= 1");
    return (p - 1.0) / 3.0;
  }
  const double sharp = two_sharp(d);
  if (!(p >= 1.0) || !(p <= sharp))
    throw DomainError(
        "gamma_heat: p beyond the Bakry-Emery exponent; use the m != 1 branch");
  const double r = (d - 1.0) / (d + 2.0);
  return r * r * (p - 1.0) * (sharp - p);
}

double gamma_heat_lsi_literature(int d) {
  if (d < 1) throw DomainError("gamma_heat_lsi_literature: d must be >= 1");
  if (d == 1) return 1.0 / 3.0;
  return (4.0 * d - 1.0) * (d - 1.0) * (d - 1.0) / ((d + 2.0) * (d + 2.0));
}

double p_star(int d) {
  if (d < 1) throw DomainError("p_star: d must be >= 1");
  if (d == 1) return 1.75;
  const double dd = d;
  return (3.0 + dd + 2.0 * dd * dd -
          2.0 * std::sqrt(4.0 * dd + 4.0 * dd * dd + dd * dd * dd)) /
         ((dd - 1.0) * (dd - 1.0));
}

MRange m_range(int d, double p, bool strict_reading) {
  if (!(p > 2.0) || !(p < two_star(d)))
    throw DomainError("m_range: need p in (2, 2*)");
  const double disc = d * (p - 1.0) * (2.0 * d - (d - 2.0) * p);
  const double root = std::sqrt(disc);
  MRange r;
  r.m_minus = (d * p + 2.0 - root) / ((d + 2.0) * p);
  r.m_plus = (d * p + 2.0 + root) / ((d + 2.0) * p);
  r.gamma_root_minus = (d * p + 2.0 - 2.0 * root) / ((d + 2.0) * p);
  r.gamma_root_plus = (d * p + 2.0 + 2.0 * root) / ((d + 2.0) * p);
  r.lo = r.m_minus;
  r.hi = r.m_plus;
  if (p < 4.0) {
    r.lo = std::max(r.lo, 2.0 / p);
    r.hi = std::min(r.hi, 1.0);
    r.description = "[m-, m+] cut by {2/p <= m < 1}";
  } else if (strict_reading) {
    r.hi = std::min(r.hi, 1.0);
    r.description = "[m-, m+] cut by {m < 1}";
  } else {
    r.description = "[m-, m+] (relaxed reading)";
  }
  if (!(r.lo < r.hi))
    throw DomainError("m_range: empty admissible set");
  return r;
}

namespace {

double beta_of_m(double p, double m) {
  const double q = 2.0 - p * (1.0 - m);
  if (q == 0.0) throw DomainError("beta_of_m: degenerate denominator 2 - p(1-m)");
  return 2.0 / q;
}

// gamma(beta) = (d/(d+2)) beta (p-1) + (1+beta(p-2))(beta-1)
//               - ((d-1)/(d+2) beta (p-1))^2
double gamma_beta(int d, double p, double beta) {
  const double t = (d - 1.0) / (d + 2.0) * beta * (p - 1.0);
  return d / (d + 2.0) * beta * (p - 1.0) +
         (1.0 + beta * (p - 2.0)) * (beta - 1.0) - t * t;
}

}  // namespace

double gamma_m(int d, double p, double m) {
  return gamma_beta(d, p, beta_of_m(p, m));
}

double gamma_m_coefficient_poly(int d, double p, double m) {
  const double g0 = 4.0 * (m * p - 1.0) * (m * p - 1.0);
  const double g1 = -4.0 * p * (m - 3.0 + p * (2.0 - m) * (1.0 + m));
  const double g2 = (m * m - 2.0 * m + 5.0) * p * p - 12.0 * p + 8.0;
  const double q = 2.0 - p * (1.0 - m);
  if (q == 0.0) throw DomainError("gamma_m_coefficient_poly: degenerate denominator");
  const double dd = d;
  return -(g0 + g1 * dd + g2 * dd * dd) / ((dd + 2.0) * (dd + 2.0) * q * q);
}

CdcParams make_cdc(int d, double p, double m) {
  if (d < 1) throw DomainError("make_cdc: d must be >= 1");
  if (!(p >= 1.0)) throw DomainError("make_cdc: p must be >= 1");
  CdcParams c;
  c.d = d;
  c.p = p;
  c.m = m;
  c.s_star = (p > 2.0) ? 1.0 / (p - 2.0) : kInf;
  if (m == 1.0) {
    c.beta = 1.0;
    c.delta = 1.0;
    c.kappa = p - 1.0;
    c.gamma = gamma_heat(d, p);
    c.zeta = 0.0;
    c.zeta_appendix_variant = 0.0;
    return c;
  }
  if (p == 2.0)
    throw DomainError("make_cdc: m != 1 requires p != 2");
  c.beta = beta_of_m(p, m);
  c.delta = 1.0 + (m - 1.0) * p * p / (4.0 * (p - 2.0));
  c.kappa = c.beta * (p - 2.0) + 1.0;
  c.gamma = gamma_beta(d, p, c.beta);
  // ODE consistency: zeta (delta-1)(p-2) = gamma/beta^2, and
  // (delta-1)(p-2) = (m-1)p^2/4.
  c.zeta = 4.0 * c.gamma / (c.beta * c.beta * (m - 1.0) * p * p);
  c.zeta_appendix_variant = 2.0 * c.gamma / (c.beta * (1.0 - c.beta));
  return c;
}

double phi_gamma(double s, double p, double gamma) {
  if (!(s >= 0.0)) throw DomainError("phi: s must be >= 0");
  if (p > 2.0 && !(s < 1.0 / (p - 2.0)))
    throw DomainError("phi: s outside [0, s_star)");
  if (p == 2.0) {
    if (gamma == 0.0) return s;
    return std::expm1(gamma * s) / gamma;
  }
  // Near gamma = 2-p the generic formula cancels catastrophically; the exact
  // boundary formula is used inside a 1e-6 window.
  if (std::abs(gamma - (2.0 - p)) < 1e-6) {
    const double w = 1.0 + (2.0 - p) * s;
    return w * std::log(w) / (2.0 - p);
  }
  const double w = 1.0 - (p - 2.0) * s;
  return (w - std::pow(w, -gamma / (p - 2.0))) / (2.0 - p - gamma);
}

double phi(double s, int d, double p) { return phi_gamma(s, p, gamma_heat(d, p)); }

double phi_mp(double s, const CdcParams& cdc) {
  const double p = cdc.p;
  if (!(s >= 0.0)) throw DomainError("phi_mp: s must be >= 0");
  if (cdc.m == 1.0) return phi_gamma(s, p, cdc.gamma);
  if (p > 2.0 && !(s <= cdc.s_star * kSCapFactor))
    throw DomainError("phi_mp: s beyond the evaluation cap s_star(1-1e-6)");
  if (s == 0.0) return 0.0;
  const double e = 1.0 - cdc.delta;
  const auto g = [&](double z) { return std::pow(1.0 - (p - 2.0) * z, e); };
  const double gs = g(s);
  const auto integrand = [&](double z) { return std::exp(-cdc.zeta * (g(z) - gs)); };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, s, 15, 1e-13, &err);
  // the estimate is pessimistic at the cap, where g' is singular; the true
  // error there stays below 1e-12 (cross-checked against the series form)
  if (err > 1e-8 * std::max(1.0, val))
    throw ConvergenceError("phi_mp: quadrature did not reach tolerance");
  return val;
}

namespace {

// phi'(s) from the shared ODE phi' = 1 + (gamma/beta^2) phi/(1-(p-2)s)^delta.
double phi_slope(double s, double phival, const CdcParams& cdc) {
  return 1.0 + cdc.gamma / (cdc.beta * cdc.beta) * phival /
                   std::pow(1.0 - (cdc.p - 2.0) * s, cdc.delta);
}

// Certified small-argument branch: on [0,t] the ODE weight is bounded by
// W = max(1, (1-(p-2)t)^{-delta}), so phi <= (e^{gW s}-1)/(gW) (Gronwall,
// g = gamma/beta^2) and psi(t) >= t - log(1+gW t)/(gW). Tight to leading
// order (psi ~ (g/2)t^2) and free of the inversion cancellation; exact at the
// p = 2 heat branch where W = 1.
double psi_small_t(double t, const CdcParams& cdc) {
  const double g = cdc.gamma / (cdc.beta * cdc.beta);
  if (g == 0.0) return 0.0;
  const double w = std::max(1.0, std::pow(1.0 - (cdc.p - 2.0) * t, -cdc.delta));
  return t - std::log1p(g * w * t) / (g * w);
}

// Monotone Newton/bisection inversion of an increasing phi on [0, s_hi].
template <class Phi>
double invert_increasing(Phi&& f, double t, double s_hi, const CdcParams& cdc) {
  if (t == 0.0) return 0.0;
  double lo = 0.0, hi = s_hi;
  const double f_hi = f(hi);
  if (t >= f_hi) return hi;  // saturation at the cap
  double s = std::min(t, hi);  // phi(s) >= s, so the root is <= t
  for (int it = 0; it < 300; ++it) {
    const double v = f(s);
    if (std::abs(v - t) <= 5e-13 * (1.0 + std::abs(t))) return s;
    if (v > t)
      hi = s;
    else
      lo = s;
    if (hi - lo <= 1e-16 * (1.0 + s)) return 0.5 * (lo + hi);
    const double step = (v - t) / phi_slope(s, v, cdc);
    double next = s - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  throw ConvergenceError("psi: inversion did not converge");
}

}  // namespace

double psi_gamma(double t, double p, double gamma) {
  if (!(t >= 0.0)) throw DomainError("psi: t must be >= 0");
  if (t == 0.0) return 0.0;
  CdcParams c;
  c.p = p;
  c.beta = 1.0;
  c.delta = 1.0;
  c.gamma = gamma;
  c.s_star = (p > 2.0) ? 1.0 / (p - 2.0) : kInf;
  if (p == 2.0 && gamma > 0.0)
    return t - std::log1p(gamma * t) / gamma;  // closed form
  if (t <= 1e-2) return psi_small_t(t, c);
  const double s_hi = (p > 2.0) ? c.s_star * kSCapFactor : t;
  const auto f = [&](double s) { return phi_gamma(s, p, gamma); };
  return t - invert_increasing(f, t, s_hi, c);
}

double psi(double t, int d, double p) { return psi_gamma(t, p, gamma_heat(d, p)); }

double psi_mp(double t, const CdcParams& cdc) {
  if (!(t >= 0.0)) throw DomainError("psi_mp: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (cdc.m == 1.0) return psi_gamma(t, cdc.p, cdc.gamma);
  if (t <= 1e-2 * cdc.s_star) return psi_small_t(t, cdc);
  const double s_hi = cdc.s_star * kSCapFactor;
  const auto f = [&](double s) { return phi_mp(s, cdc); };
  return t - invert_increasing(f, t, s_hi, cdc);
}

double phi_c(double s, double c, int d, double p) {
  if (!(c > 0.0) || !(c < 1.0)) throw DomainError("phi_c: c must be in (0,1)");
  if (!(p > 2.0)) throw DomainError("phi_c: p must be > 2");
  const double ss = 1.0 / (p - 2.0);
  if (!(s >= 0.0) || !(s < ss)) throw DomainError("phi_c: s outside [0, s_star)");
  const double rad = ss * ss + 4.0 * c * s * (s - ss);
  return 0.5 * d / (1.0 - c) * (2.0 * c * s - ss + std::sqrt(rad));
}

namespace {

// phi_{m,p} sampled cumulatively over a fixed s-grid: per-interval 8-point
// Gauss-Legendre on the integral representation.
std::vector<double> phi_mp_on_grid(const CdcParams& cdc,
                                   const std::vector<double>& s) {
  static const double gl_x[4] = {0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
  static const double gl_w[4] = {0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
  const double p = cdc.p;
  const double e = 1.0 - cdc.delta;
  const auto g = [&](double z) { return std::pow(1.0 - (p - 2.0) * z, e); };
  std::vector<double> raw(s.size(), 0.0);  // integral of exp(-zeta g) on [0,s_j]
  double acc = 0.0;
  for (size_t j = 1; j < s.size(); ++j) {
    const double a = s[j - 1], b = s[j];
    const double h = 0.5 * (b - a), mid = 0.5 * (a + b);
    double seg = 0.0;
    for (int k = 0; k < 4; ++k) {
      seg += gl_w[k] * (std::exp(-cdc.zeta * g(mid + h * gl_x[k])) +
                        std::exp(-cdc.zeta * g(mid - h * gl_x[k])));
    }
    acc += seg * h;
    raw[j] = acc;
  }
  std::vector<double> out(s.size(), 0.0);
  for (size_t j = 0; j < s.size(); ++j) out[j] = std::exp(cdc.zeta * g(s[j])) * raw[j];
  return out;
}

}  // namespace

FrankResult frank_constant(int d, double p, int m_grid, int s_grid) {
  if (!(p > 2.0) || !(p < two_star(d)))
    throw DomainError("frank_constant: need p in (2, 2*)");
  FrankResult out;
  out.c_upper = (p - 1.0) * (d + p) / (2.0 * (p - 2.0) * (d + 3.0));

  const MRange range = m_range(d, p);
  const double s_star_v = 1.0 / (p - 2.0);
  const double s_cap = s_star_v * kSCapFactor;

  // uniform grid plus geometric refinement toward the cap
  std::vector<double> s;
  s.reserve(static_cast<size_t>(s_grid) + 33);
  for (int j = 0; j <= s_grid; ++j) s.push_back(s_cap * j / s_grid);
  double gap = s_cap / s_grid;
  for (int j = 0; j < 32; ++j) {
    gap *= 0.7;
    s.push_back(s_cap - gap);
  }
  std::sort(s.begin(), s.end());

  const auto dominates = [&](const std::vector<double>& phi_vals, double c) {
    for (size_t j = 1; j < s.size(); ++j) {
      if (phi_c(s[j], c, d, p) > d * (phi_vals[j] - s[j])) return false;
    }
    return true;
  };

  const auto curves_for = [&](const std::vector<double>& ms) {
    std::vector<std::vector<double>> curves;
    curves.reserve(ms.size());
    for (double m : ms) curves.push_back(phi_mp_on_grid(make_cdc(d, p, m), s));
    return curves;
  };

  const auto best_feasible_m = [&](const std::vector<double>& ms,
                                   const std::vector<std::vector<double>>& curves,
                                   double c) -> int {
    for (size_t i = 0; i < ms.size(); ++i)
      if (dominates(curves[i], c)) return static_cast<int>(i);
    return -1;
  };

  std::vector<double> ms;
  const double margin = 1e-9 * (range.hi - range.lo);
  for (int i = 0; i < m_grid; ++i)
    ms.push_back(range.lo + margin +
                 (range.hi - range.lo - 2 * margin) * i / (m_grid - 1.0));
  auto curves = curves_for(ms);

  const auto bisect = [&](double lo, double hi) {
    int witness = -1;
    for (int it = 0; it < 60; ++it) {
      const double c = 0.5 * (lo + hi);
      const int idx = best_feasible_m(ms, curves, c);
      if (idx >= 0) {
        lo = c;
        witness = idx;
      } else {
        hi = c;
      }
    }
    return std::make_pair(lo, witness);
  };

  double c_hi = std::min(out.c_upper, 1.0 - 1e-9);
  auto [c0, w0] = bisect(0.0, c_hi);
  if (w0 < 0) throw ConvergenceError("frank_constant: no feasible c found");

  // refine the m-grid around the witness
  const double dm = (range.hi - range.lo) / (m_grid - 1.0);
  const double m0 = ms[static_cast<size_t>(w0)];
  std::vector<double> ms2;
  for (int i = 0; i < m_grid; ++i) {
    const double m = m0 - dm + 2.0 * dm * i / (m_grid - 1.0);
    if (m > range.lo && m < range.hi) ms2.push_back(m);
  }
  auto curves2 = curves_for(ms2);
  ms = std::move(ms2);
  curves = std::move(curves2);
  auto [c1, w1] = bisect(c0, c_hi);

  out.c_lower = std::max(c0, c1);
  out.m_witness = (w1 >= 0) ? ms[static_cast<size_t>(w1)] : m0;
  return out;
}

}  // namespace sphstab
