#include <doctest.h>

#include <cmath>

#include "sphstab/deficit.hpp"
#include "sphstab/errors.hpp"
#include "sphstab/rng.hpp"
#include "sphstab/spectral.hpp"
#include "sphstab/stability.hpp"
#include "sphstab/zonal.hpp"

using namespace sphstab;

namespace {

ZonalFn random_fn(int d, std::uint64_t seed, double amp = 0.3, int L = 24) {
  Rng rng(seed);
  std::vector<double> c(L + 1, 0.0);
  c[0] = 1.0;
  for (int ell = 1; ell <= L; ++ell) c[ell] = amp * rng.normal() / (1.0 + ell * ell);
  return ZonalFn::from_coeffs(d, std::move(c));
}

}  // namespace

TEST_CASE("norms") {
  const ZonalFn one = test_family("one_plus_eps_axis", 3, 0.0);
  for (double q : {1.0, 2.0, 3.7}) CHECK(one.norm_p(q) == doctest::Approx(1.0));

  const ZonalFn z = ZonalFn::from_profile(3, [](double t) { return t; }, 8);
  CHECK(z.norm_p(2.0) == doctest::Approx(0.5).epsilon(1e-13));  // sqrt(1/(d+1))

  const ZonalFn f = test_family("one_plus_eps_axis", 2, 0.7);
  CHECK(f.norm_p(1.0) == doctest::Approx(1.0).epsilon(1e-13));

  // Hölder monotonicity on a random function
  const ZonalFn g = random_fn(3, 7);
  double prev = 0.0;
  for (double q = 1.0; q <= 6.0; q += 0.5) {
    const double v = g.norm_p(q);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("gradient norm: spectral vs quadrature routes") {
  for (int d : {1, 2, 3}) {
    const ZonalFn c = test_family("one_plus_eps_axis", d, 0.0);
    CHECK(c.grad_norm_sq() == doctest::Approx(0.0));
    const ZonalFn y = test_family("Y", d);
    CHECK(y.grad_norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.norm2_sq() == doctest::Approx(1.0 / d).epsilon(1e-12));
    const ZonalFn f = random_fn(d, 11);
    CHECK(f.grad_norm_sq() ==
          doctest::Approx(f.grad_norm_sq_quadrature()).epsilon(1e-9));
  }
  // unit-L2 degree-2 mode has gradient norm lambda_2 = 2(d+1)
  for (int d : {2, 4}) {
    std::vector<double> c(3, 0.0);
    c[2] = 1.0;
    const ZonalFn m2 = ZonalFn::from_coeffs(d, c);
    CHECK(m2.grad_norm_sq() == doctest::Approx(2.0 * (d + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("entropy") {
  const ZonalFn c = test_family("one_plus_eps_axis", 3, 0.0);
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(std::abs(c.entropy(p)) < 1e-14);

  // E_2[1 + eps Y] = eps^2 ||Y||_2^2 + O(eps^4) = eps^2/d + O(eps^4)
  for (int d : {2, 3}) {
    for (double eps : {0.05, 0.025}) {
      const ZonalFn f = ZonalFn::from_profile(d, [&](double z) {
        return 1.0 + eps * std::sqrt((d + 1.0) / d) * z;
      }, 16);
      CHECK(std::abs(f.entropy(2.0) - eps * eps / d) < 2.0 * std::pow(eps, 4));
    }
  }

  // p -> 2 continuity
  const ZonalFn f = random_fn(3, 5);
  CHECK(std::abs(f.entropy(2.0 + 1e-7) - f.entropy(2.0)) < 1e-8);

  // p=4 entropy against the quartic expansion with a_{p,d} = p(p-1)/(2d)
  {
    const int d = 3;
    const double eps = 0.1, p = 4.0;
    const ZonalFn g = test_family("one_plus_eps_axis", d, eps * std::sqrt((d + 1.0) / d));
    const double apd = p * (p - 1.0) / (2.0 * d);
    const double bpd = 0.25 * (p - 2.0) * (p - 3.0) * (d + 1.0) / (d * (d + 3.0)) * apd;
    const double npp = std::pow(g.norm_p(p), p);
    const double expansion = 1.0 + apd * eps * eps + bpd * std::pow(eps, 4);
    CHECK(std::abs(npp - expansion) < 5.0 * std::pow(eps, 6));
  }

  const ZonalFn zero = ZonalFn::from_coeffs(3, std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(zero.entropy(2.0), DegenerateInputError);
}

TEST_CASE("projection") {
  const ZonalFn c = test_family("one_plus_eps_axis", 3, 0.0);
  CHECK(c.project(2).norm2_sq() == doctest::Approx(0.0));

  const ZonalFn f = test_family("one_plus_eps_axis", 3, 0.2);
  const ZonalFn p1 = f.project(1);
  CHECK(p1.mean() == doctest::Approx(0.0));
  CHECK(p1.norm2_sq() == doctest::Approx(0.04 / 4.0).epsilon(1e-12));  // (eps c1)^2

  const ZonalFn g = random_fn(2, 3);
  const ZonalFn gk = g.project(3);
  // idempotent, orthogonal split, Pythagoras for the gradient
  const ZonalFn gkk = gk.project(3);
  for (size_t i = 0; i < gk.coeffs().size(); ++i)
    CHECK(gk.coeffs()[i] == doctest::Approx(gkk.coeffs()[i]).epsilon(1e-12));
  double ip = 0.0, rest_grad = 0.0;
  for (int ell = 0; ell <= g.degree_cap(); ++ell) {
    const double ck = (ell >= 1 && ell <= 3) ? g.coeffs()[ell] : 0.0;
    const double cr = g.coeffs()[ell] - ck;
    ip += ck * cr;
    rest_grad += lambda_j(2, ell) * cr * cr;
  }
  CHECK(std::abs(ip) < 1e-12);
  CHECK(std::abs(g.grad_norm_sq() - gk.grad_norm_sq() - rest_grad) < 1e-10);
}

TEST_CASE("test families: paper moments and eigen-concentration") {
  for (int d : {1, 2, 3, 5}) {
    const MomentTable mom = moment_table(d);
    const ZonalFn y = test_family("Y", d);
    const ZonalFn y2 = test_family("Y2", d);
    const ZonalFn y3 = test_family("Y3", d);
    CHECK(y2.norm2_sq() == doctest::Approx(mom.y2_l2_sq).epsilon(1e-12));
    CHECK(y2.grad_norm_sq() == doctest::Approx(mom.y2_grad_sq).epsilon(1e-12));
    CHECK(y3.norm2_sq() == doctest::Approx(mom.y3_l2_sq).epsilon(1e-12));
    CHECK(y3.grad_norm_sq() == doctest::Approx(mom.y3_grad_sq).epsilon(1e-12));
    const double y66 = std::pow(y.norm_p(6.0), 6);
    CHECK(y66 == doctest::Approx(mom.y_l6_6).epsilon(1e-11));
    // ladder concentration on a single degree
    for (int ell = 0; ell <= y2.degree_cap(); ++ell)
      if (ell != 2) CHECK(std::abs(y2.coeffs()[ell]) < 1e-11);
    for (int ell = 0; ell <= y3.degree_cap(); ++ell)
      if (ell != 3) CHECK(std::abs(y3.coeffs()[ell]) < 1e-11);
  }
  CHECK_THROWS_AS(test_family("unknown", 3, 0.1), DomainError);
}

TEST_CASE("random_highmode: support and normalization") {
  const ZonalFn g = random_highmode(3, 42, 3);
  CHECK(g.grad_norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(g.mean()) < 1e-15);
  CHECK(std::abs(g.coeffs()[1]) < 1e-15);
  CHECK(std::abs(g.coeffs()[2]) < 1e-15);
  // deterministic under the same seed
  const ZonalFn g2 = random_highmode(3, 42, 3);
  for (size_t i = 0; i < g.coeffs().size(); ++i)
    CHECK(g.coeffs()[i] == g2.coeffs()[i]);
}

TEST_CASE("parseval and serialization round-trip") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 9ull}) {
    const ZonalFn f = random_fn(3, seed);
    double parseval = 0.0;
    for (double c : f.coeffs()) parseval += c * c;
    CHECK(std::abs(parseval - f.norm2_sq()) < 1e-10);
    CHECK(f.sync_residual() < 1e-10);
    const ZonalFn back = ZonalFn::from_json(f.to_json());
    REQUIRE(back.coeffs().size() == f.coeffs().size());
    for (size_t i = 0; i < f.coeffs().size(); ++i)
      CHECK(back.coeffs()[i] == f.coeffs()[i]);  // exact
  }
}

TEST_CASE("mean bound under a gradient constraint") {
  // ||F||_2 = 1 and ||grad F||_2^2 = theta < d implies (d-theta)/d < mean^2 <= 1
  for (int d : {1, 2, 3}) {
    for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
      ZonalFn f = random_fn(d, seed, 0.2);
      std::vector<double> c = f.coeffs();
      const double n2 = std::sqrt(f.norm2_sq());
      for (double& x : c) x /= n2;
      const ZonalFn g = ZonalFn::from_coeffs(d, std::move(c));
      const double theta = g.grad_norm_sq();
      if (theta >= d) continue;
      const double mean_sq = g.mean() * g.mean();
      CHECK(mean_sq > (d - theta) / d - 1e-12);
      CHECK(mean_sq <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("deficit report: constants, positivity, improved audits") {
  const ZonalFn c = test_family("one_plus_eps_axis", 3, 0.0);
  const DeficitReport r0 = deficit_report(c, 3.0, false);
  CHECK(std::abs(r0.deficit) < 1e-12);
  CHECK(r0.all_pass());

  // deficit >= -tol on random functions (the base inequality)
  for (int d : {1, 2, 3}) {
    for (double p : {1.5, 2.0, 2.8}) {
      for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const ZonalFn f = random_fn(d, seed);
        const DeficitReport r = deficit_report(f, p, false);
        CHECK(r.deficit >= -1e-9);
        for (const auto& a : r.audits)
          if (a.applicable) CHECK(a.pass);
      }
    }
  }

  // pure high-mode functions: improvement audit in the orthogonal regime
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ZonalFn g = random_highmode(3, seed, 2);
    const DeficitReport r = deficit_report(g, 2.5, false);
    const Params params(3, 2.5);
    CHECK(r.deficit >= improved_constant(params, 1) * r.fisher - 1e-8);
  }
}

TEST_CASE("epsilon^4 deficit asymptotics via Richardson extrapolation") {
  // deficit(1+eps Y)/eps^4 -> (d+p)(p-1)/(2d(d+3))
  const auto limit_value = [](int d, double p) {
    return (d + p) * (p - 1.0) / (2.0 * d * (d + 3.0));
  };
  const auto measured = [](int d, double p, double eps) {
    const double yd = std::sqrt((d + 1.0) / d);
    const ZonalFn f = test_family("one_plus_eps_axis", d, eps * yd);
    const double deficit = f.grad_norm_sq() - d * f.entropy(p);
    return deficit / std::pow(eps, 4);
  };
  for (auto [d, p] : std::vector<std::pair<int, double>>{{3, 3.0}, {2, 2.0}}) {
    const double v1 = measured(d, p, 0.02);
    const double v2 = measured(d, p, 0.01);
    const double rich = (4.0 * v2 - v1) / 3.0;
    CHECK(std::abs(rich - limit_value(d, p)) < 1e-3 * limit_value(d, p));
  }
}
