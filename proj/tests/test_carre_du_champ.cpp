#include <doctest.h>

#include <cmath>
#include <vector>

#include "sphstab/carre_du_champ.hpp"
#include "sphstab/errors.hpp"
#include "sphstab/rng.hpp"
#include "sphstab/spectral.hpp"
#include "sphstab/zonal.hpp"

using namespace sphstab;

namespace {

// RK4 integration of the defining ODE phi' = 1 + (gamma/beta^2) phi /
// (1-(p-2)s)^delta -- the independent oracle for both phi branches.
double phi_ode_oracle(double s_end, double p, double gamma, double beta, double delta,
                      int steps = 20000) {
  const double h = s_end / steps;
  double s = 0.0, v = 0.0;
  const auto f = [&](double ss, double vv) {
    return 1.0 + gamma / (beta * beta) * vv / std::pow(1.0 - (p - 2.0) * ss, delta);
  };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(s, v);
    const double k2 = f(s + 0.5 * h, v + 0.5 * h * k1);
    const double k3 = f(s + 0.5 * h, v + 0.5 * h * k2);
    const double k4 = f(s + h, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s += h;
  }
  return v;
}

// E(a, X) = int_0^X t^{a-1} e^t dt by its entire series
double exp_incomplete_series(double a, double X) {
  double term = std::pow(X, a) / a;
  double sum = term;
  for (int n = 1; n < 400; ++n) {
    term *= X / n * (a + n - 1.0) / (a + n);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

ZonalFn random_positive(int d, std::uint64_t seed, double amp = 0.3) {
  Rng rng(seed);
  std::vector<double> c(25, 0.0);
  c[0] = 1.0;
  for (int ell = 1; ell <= 24; ++ell) c[ell] = amp * rng.normal() / (1.0 + ell * ell);
  return ZonalFn::from_coeffs(d, std::move(c));
}

}  // namespace

TEST_CASE("gamma_heat values and domain") {
  CHECK(gamma_heat(1, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (int d : {2, 3, 5})
    CHECK(gamma_heat(d, 2.0) ==
          doctest::Approx((4.0 * d - 1.0) / ((d + 2.0) * (d + 2.0))).epsilon(1e-13));
  // literature variant differs by (d-1)^2 for d >= 2 (reported, not used)
  for (int d : {2, 3, 4})
    CHECK(gamma_heat_lsi_literature(d) ==
          doctest::Approx(gamma_heat(d, 2.0) * (d - 1.0) * (d - 1.0)).epsilon(1e-13));
  // vanishes at both ends of the admissible p-range
  CHECK(std::abs(gamma_heat(3, 1.0)) < 1e-14);
  CHECK(std::abs(gamma_heat(3, two_sharp(3))) < 1e-12);
  CHECK_THROWS_AS(gamma_heat(3, two_sharp(3) + 0.1), DomainError);
}

TEST_CASE("p_star solves gamma = 2 - p") {
  CHECK(p_star(1) == doctest::Approx(1.75));
  CHECK(p_star(2) == doctest::Approx(13.0 - 2.0 * std::sqrt(32.0)).epsilon(1e-13));
  for (int d : {1, 2, 3, 4, 6}) {
    const double ps = p_star(d);
    CHECK(std::abs(gamma_heat(d, ps) - (2.0 - ps)) < 1e-10);
  }
}

TEST_CASE("admissible m interval") {
  const MRange r = m_range(3, 4.0);
  CHECK(r.m_minus == doctest::Approx((14.0 - std::sqrt(18.0)) / 20.0).epsilon(1e-14));
  CHECK(r.m_plus == doctest::Approx((14.0 + std::sqrt(18.0)) / 20.0).epsilon(1e-14));
  CHECK(r.m_minus < r.m_plus);
  // canonical m lies inside the usable interval
  for (int d : {3, 4, 5}) {
    for (double p : {2.5, 3.0, 4.0}) {
      if (p >= two_star(d)) continue;
      const MRange rr = m_range(d, p);
      const double m = canonical_m(p);
      CHECK(m >= rr.lo);
      CHECK(m <= rr.hi);
    }
  }
  // gamma vanishes at the true roots (double radical) and is strictly
  // positive on all of [m-, m+], which sits inside {gamma >= 0}
  for (double m : {r.gamma_root_minus, r.gamma_root_plus})
    CHECK(std::abs(gamma_m(3, 4.0, m)) < 1e-10);
  for (double f : {0.0, 0.2, 0.5, 0.8, 1.0})
    CHECK(gamma_m(3, 4.0, r.m_minus + f * (r.m_plus - r.m_minus)) > 0.0);
  // just outside the true roots gamma turns negative
  CHECK(gamma_m(3, 4.0, r.gamma_root_minus - 1e-3) < 0.0);
  CHECK(gamma_m(3, 4.0, r.gamma_root_plus + 1e-3) < 0.0);
  CHECK_THROWS_AS(m_range(3, 2.0), DomainError);
}

TEST_CASE("gamma_m: reduction at m=1 and two-formula agreement") {
  for (int d : {1, 2, 3, 4}) {
    for (double p : {1.5, 2.5, 3.2}) {
      if (p >= two_star(d)) continue;
      if (p <= 2.0 || p <= two_sharp(d))
        CHECK(std::abs(gamma_m(d, p, 1.0) - gamma_heat(d, p)) < 1e-12);
      for (double m : {0.7, 0.85, 1.1})
        CHECK(gamma_m(d, p, m) ==
              doctest::Approx(gamma_m_coefficient_poly(d, p, m)).epsilon(1e-11));
    }
  }
  CHECK(gamma_m(3, 4.0, 0.75) == doctest::Approx(2.84).epsilon(1e-12));
}

TEST_CASE("cdc parameter pack consistency") {
  for (int d : {2, 3}) {
    for (double p : {2.5, 3.0, 4.0}) {
      if (p >= two_star(d)) continue;
      for (double mfrac : {0.3, 0.6}) {
        const MRange r = m_range(d, p);
        const double m = r.lo + mfrac * (r.hi - r.lo);
        const CdcParams c = make_cdc(d, p, m);
        // m <-> beta relation
        CHECK(std::abs(c.m - (1.0 + 2.0 / p * (1.0 / c.beta - 1.0))) < 1e-12);
        // the two delta formulas agree
        const double delta2 = (p - (4.0 - p) * c.beta) / (2.0 * c.beta * (p - 2.0));
        CHECK(std::abs(c.delta - delta2) < 1e-12);
        // kappa
        CHECK(std::abs(c.kappa - (c.beta * (p - 2.0) + 1.0)) < 1e-13);
        // ODE-consistent zeta; the appendix parenthetical is p times it
        CHECK(std::abs(c.zeta * (c.delta - 1.0) * (p - 2.0) -
                       c.gamma / (c.beta * c.beta)) < 1e-12);
        CHECK(c.zeta_appendix_variant == doctest::Approx(p * c.zeta).epsilon(1e-10));
        CHECK(c.s_star == doctest::Approx(1.0 / (p - 2.0)));
      }
    }
  }
  const CdcParams heat = make_cdc(3, 1.5, 1.0);
  CHECK(heat.beta == 1.0);
  CHECK(heat.delta == 1.0);
  CHECK(std::isinf(heat.s_star));
  // canonical m gives delta = 1 - p/8
  for (double p : {2.5, 3.0, 4.0, 5.0}) {
    const CdcParams c = make_cdc(3, p, canonical_m(p));
    if (p < two_star(3)) CHECK(c.delta == doctest::Approx(1.0 - p / 8.0).epsilon(1e-13));
  }
}

TEST_CASE("phi: closed forms against the ODE oracle") {
  // p=2, d=1 (gamma = 1/3): phi(1) = 3(e^{1/3}-1)
  CHECK(phi(1.0, 1, 2.0) ==
        doctest::Approx(3.0 * (std::exp(1.0 / 3.0) - 1.0)).epsilon(1e-13));
  CHECK(phi(1.0, 1, 2.0) == doctest::Approx(phi_ode_oracle(1.0, 2.0, 1.0 / 3.0, 1.0, 1.0))
                                .epsilon(1e-10));
  for (int d : {1, 2, 3}) {
    for (double p : {1.4, 2.0, 2.6}) {
      if (d >= 2 && p > two_sharp(d)) continue;
      const double g = gamma_heat(d, p);
      CHECK(phi(0.0, d, p) == 0.0);
      const double s1 = (p > 2.0) ? 0.3 / (p - 2.0) : 1.2;
      CHECK(phi(s1, d, p) ==
            doctest::Approx(phi_ode_oracle(s1, p, g, 1.0, 1.0)).epsilon(1e-9));
      // phi'(0) = 1 by central differences
      const double h = 1e-6;
      CHECK(std::abs((phi(h, d, p) - 0.0) / h - 1.0) < 1e-5);
      // convexity on a grid
      double prev_slope = -1.0;
      for (double s = 0.0; s + 2e-3 <= s1; s += 1e-3) {
        const double slope = (phi(s + 1e-3, d, p) - phi(s, d, p)) / 1e-3;
        CHECK(slope >= prev_slope - 1e-12);
        prev_slope = slope;
      }
    }
  }
  // branch continuity across gamma = 2 - p
  {
    const double p = 1.6, g0 = 2.0 - p;
    const double a = phi_gamma(0.8, p, g0 * (1.0 + 5e-7));
    const double b = phi_gamma(0.8, p, g0);
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("phi_mp: integral formula vs ODE and incomplete-gamma series") {
  for (auto [d, p, m] : std::vector<std::tuple<int, double, double>>{
           {3, 4.0, 0.75}, {3, 3.0, canonical_m(3.0)}, {4, 3.0, 0.9}, {3, 2.2, 1.05}}) {
    const CdcParams c = make_cdc(d, p, m);
    REQUIRE(c.gamma >= 0.0);
    const double s1 = 0.5 * c.s_star;
    CHECK(phi_mp(0.0, c) == 0.0);
    CHECK(phi_mp(s1, c) ==
          doctest::Approx(phi_ode_oracle(s1, p, c.gamma, c.beta, c.delta)).epsilon(1e-8));
    // unit slope at the origin
    const double h = 1e-6;
    CHECK(std::abs(phi_mp(h, c) / h - 1.0) < 1e-5);
  }
  // fast-diffusion branch against the incomplete-gamma-type series
  {
    const CdcParams c = make_cdc(3, 4.0, 0.75);
    const double p = 4.0, mu = -c.zeta, e = 1.0 - c.delta;
    REQUIRE(mu > 0.0);
    const double s = 0.2;
    const double ws = 1.0 - (p - 2.0) * s;
    const double a = 1.0 / e;
    const double series =
        std::exp(-mu * std::pow(ws, e)) / ((p - 2.0) * e * std::pow(mu, a)) *
        (exp_incomplete_series(a, mu) - exp_incomplete_series(a, mu * std::pow(ws, e)));
    CHECK(phi_mp(s, c) == doctest::Approx(series).epsilon(1e-10));
  }
}

TEST_CASE("psi: inversion, closed form, convexity, bounds") {
  CHECK(psi(0.0, 3, 2.5) == 0.0);
  // p=2 closed form psi(t) = t - log(1+gamma t)/gamma
  for (int d : {1, 2, 3}) {
    const double g = gamma_heat(d, 2.0);
    for (double t : {0.3, 1.0, 4.0, 10.0}) {
      CHECK(psi(t, d, 2.0) ==
            doctest::Approx(t - std::log1p(g * t) / g).epsilon(1e-12));
      // lower bound psi(t) >= (gamma/2) t^2/(1+gamma t)
      CHECK(psi(t, d, 2.0) >= 0.5 * g * t * t / (1.0 + g * t) - 1e-12);
    }
  }
  // inversion residual for generic branches
  for (auto [d, p] : std::vector<std::pair<int, double>>{{3, 1.5}, {3, 2.6}, {1, 3.0}}) {
    const double g = gamma_heat(d, p);
    for (double t : {0.2, 0.9, 2.0}) {
      const double s = t - psi_gamma(t, p, g);
      CHECK(std::abs(phi_gamma(s, p, g) - t) < 1e-10 * (1.0 + t));
    }
  }
  // psi''(0) = gamma_heat by central differences
  for (auto [d, p] : std::vector<std::pair<int, double>>{{2, 2.0}, {3, 2.5}, {1, 1.8}}) {
    const double g = gamma_heat(d, p);
    const double h = 1e-3;
    const double second =
        (psi_gamma(2.0 * h, p, g) - 2.0 * psi_gamma(h, p, g)) / (h * h);
    CHECK(std::abs(second - g) < 1e-5 + 1e-3 * g);
  }
  // convexity of psi and the asymptote t - psi(t) -> s_star for p in (2, 2#)
  {
    const int d = 3;
    const double p = 2.7;
    double prev = -1.0;
    for (double t = 0.1; t < 12.0; t += 0.1) {
      const double dd2 =
          psi(t + 0.05, d, p) - 2.0 * psi(t, d, p) + psi(t - 0.05, d, p);
      CHECK(dd2 > -1e-10);
      prev = dd2;
    }
    (void)prev;
    const double s_star = 1.0 / (p - 2.0);
    CHECK(std::abs((50.0 - psi(50.0, d, p)) - s_star) < 2e-2);
    CHECK(std::abs((200.0 - psi(200.0, d, p)) - s_star) < 1e-2);
  }
  // psi_mp saturates smoothly past the cap
  {
    const CdcParams c = make_cdc(3, 4.0, canonical_m(4.0));
    const double t = 100.0;
    CHECK(psi_mp(t, c) == doctest::Approx(t - c.s_star).epsilon(1e-4));
  }
}

TEST_CASE("phi_c: deficit form round-trip and small-c expansion") {
  const int d = 3;
  const double p = 4.0, s_star = 1.0 / (p - 2.0);
  CHECK(phi_c(0.0, 0.5, d, p) == doctest::Approx(0.0));
  for (double c : {0.1, 0.5, 0.9}) {
    for (double e : {0.05, 0.2, 0.4}) {
      const double x = phi_c(e, c, d, p);
      const double i = x + d * e;
      CHECK(x == doctest::Approx(c * i * i / (i + d * s_star - d * e)).epsilon(1e-10));
    }
  }
  // c -> 0+: phi_c(s)/c -> d(p-2)s^2
  for (double s : {0.1, 0.3}) {
    const double c = 1e-7;
    CHECK(phi_c(s, c, d, p) / c ==
          doctest::Approx(d * (p - 2.0) * s * s).epsilon(1e-5));
  }
  CHECK_THROWS_AS(phi_c(0.1, 1.5, d, p), DomainError);
}

TEST_CASE("frank constant: sandwich and s-grid monotonicity") {
  const FrankResult r = frank_constant(3, 4.0, 24, 96);
  CHECK(r.c_upper == doctest::Approx(0.875).epsilon(1e-14));
  CHECK(r.c_lower > 0.0);
  CHECK(r.c_lower <= r.c_upper);
  const MRange mr = m_range(3, 4.0);
  CHECK(r.m_witness >= mr.lo);
  CHECK(r.m_witness <= mr.hi);
  // a finer s-grid can only shrink the feasible set
  const FrankResult r2 = frank_constant(3, 4.0, 24, 192);
  CHECK(r2.c_lower <= r.c_lower + 1e-9);
}

TEST_CASE("flow-improvement audits on random zonal functions") {
  // deficit >= d ||F||_p^2 psi(fisher/(d ||F||_p^2)) (heat branch)
  for (int d : {1, 2, 3}) {
    for (double p : {1.5, 2.3}) {
      if (d >= 2 && p >= two_sharp(d)) continue;
      for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const ZonalFn f = random_positive(d, seed);
        const double np2 = std::pow(f.norm_p(p), 2);
        const double deficit = f.grad_norm_sq() - d * f.entropy(p);
        const double rhs = d * np2 * psi(f.grad_norm_sq() / (d * np2), d, p);
        CHECK(deficit >= rhs - 1e-8);
      }
    }
  }
  // same with psi_mp for p in (2, 2*)
  for (int d : {3, 4}) {
    for (double p : {2.5, 3.0}) {
      const CdcParams c = make_cdc(d, p, canonical_m(p));
      for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const ZonalFn f = random_positive(d, seed);
        const double np2 = std::pow(f.norm_p(p), 2);
        const double deficit = f.grad_norm_sq() - d * f.entropy(p);
        const double rhs = d * np2 * psi_mp(f.grad_norm_sq() / (d * np2), c);
        CHECK(deficit >= rhs - 1e-8);
      }
    }
  }
  // quartic lower bound at p = 2
  for (int d : {1, 2, 3}) {
    const double g = gamma_heat(d, 2.0);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const ZonalFn f = random_positive(d, seed);
      const double i = f.grad_norm_sq();
      const double n2 = f.norm2_sq();
      const double deficit = i - d * f.entropy(2.0);
      CHECK(deficit >= 0.5 * g * i * i / (g * i + d * n2) - 1e-8);
    }
  }
}
