#include <doctest.h>

#include <cmath>
#include <vector>

#include "sphstab/errors.hpp"
#include "sphstab/special_functions.hpp"

using namespace sphstab;

namespace {

// Independent digamma oracle: recursion to x+24, then the Euler-Maclaurin
// asymptotic series with Bernoulli terms. Error well below 1e-13 here.
double digamma_oracle(double x) {
  double acc = 0.0;
  while (x < 24.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                 inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
}

// Independent log-gamma oracle: shifted Stirling series.
double log_gamma_oracle(double x) {
  double acc = 0.0;
  while (x < 24.0) {
    acc -= std::log(x);
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  const double series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 -
                        inv2 * (1.0 / 1680.0))));
  return acc + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * M_PI) + series;
}

// Series oracle for the regularized lower incomplete gamma.
double gamma_p_oracle(double a, double x) {
  if (x == 0.0) return 0.0;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::exp(a * std::log(x) - x - log_gamma_oracle(a)) * sum;
}

}  // namespace

TEST_CASE("log_gamma basics and functional equation") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(log_gamma(0.5) == doctest::Approx(std::log(std::sqrt(M_PI))).epsilon(1e-13));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
  for (double x = 0.1; x <= 50.0; x += 0.37) {
    CHECK(std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) < 1e-12);
    CHECK(std::abs(log_gamma(x) - log_gamma_oracle(x)) <
          1e-13 * std::max(1.0, std::abs(log_gamma_oracle(x))));
  }
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.0), DomainError);
}

TEST_CASE("digamma values, recursion and oracle agreement") {
  const double euler = 0.57721566490153286060651209;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(2.0) - digamma(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(digamma(0.5) == doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  for (double x = 0.1; x <= 50.0; x += 0.41) {
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-12);
    CHECK(std::abs(digamma(x) - digamma_oracle(x)) < 1e-12);
  }
  CHECK_THROWS_AS(digamma(0.0), DomainError);
}

TEST_CASE("regularized incomplete gamma") {
  CHECK(lower_incomplete_gamma_regularized(0.7, 0.0) == 0.0);
  for (double x : {0.1, 0.5, 1.0, 3.0})
    CHECK(lower_incomplete_gamma_regularized(1.0, x) ==
          doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-13));
  CHECK(std::abs(lower_incomplete_gamma_regularized(0.5, 1.0) - 0.8427007929497149) <
        1e-11);
  for (double a : {0.5, 1.3, 4.0})
    for (double x : {0.2, 0.9, 2.5, 7.0})
      CHECK(std::abs(lower_incomplete_gamma_regularized(a, x) - gamma_p_oracle(a, x)) <
            1e-11);
  // monotone in x
  double prev = -1.0;
  for (double x = 0.0; x < 6.0; x += 0.1) {
    const double v = lower_incomplete_gamma_regularized(1.7, x);
    CHECK(v >= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
  CHECK_THROWS_AS(lower_incomplete_gamma_regularized(-1.0, 1.0), DomainError);
}

TEST_CASE("gauss-jacobi rule: structure, normalization, exactness") {
  for (int d : {1, 2, 3, 5, 8}) {
    for (int n : {8, 32, 129}) {
      auto rule = gauss_jacobi_rule(d, n);
      double wsum = 0.0;
      for (int i = 0; i < n; ++i) {
        CHECK(rule->nodes[i] > -1.0);
        CHECK(rule->nodes[i] < 1.0);
        if (i > 0) CHECK(rule->nodes[i] > rule->nodes[i - 1]);
        CHECK(rule->weights[i] > 0.0);
        wsum += rule->weights[i];
      }
      CHECK(std::abs(wsum - 1.0) < 1e-13);
      // exactness on monomials against the Beta-moment oracle
      for (int k = 0; k <= std::min(2 * n - 1, 40); ++k) {
        const double got = rule->integrate([k](double z) { return std::pow(z, k); });
        CHECK(std::abs(got - axis_moment(d, k)) < 1e-12);
      }
    }
  }
  CHECK(std::abs(gauss_jacobi_rule(3, 16)->integrate([](double z) { return z * z; }) -
                 0.25) < 1e-13);
  CHECK(std::abs(gauss_jacobi_rule(3, 16)->integrate(
                     [](double z) { return z * z * z * z; }) -
                 3.0 / 24.0) < 1e-13);
  CHECK_THROWS_AS(gauss_jacobi_rule(3, 4096), CapacityError);
  CHECK_THROWS_AS(gauss_jacobi_rule(3, 0), DomainError);
}

TEST_CASE("d=1 reduces to the Chebyshev rule") {
  const int n = 17;
  auto rule = gauss_jacobi_rule(1, n);
  for (int i = 0; i < n; ++i) {
    const double expect = std::cos(M_PI * (n - i - 0.5) / n);
    CHECK(std::abs(rule->nodes[i] - expect) < 1e-13);
    CHECK(std::abs(rule->weights[i] - 1.0 / n) < 1e-13);
  }
}

TEST_CASE("gegenbauer ladder: normalization and orthonormality") {
  for (int d : {1, 2, 3, 6}) {
    CHECK(gegenbauer_eval(d, 0, 0.37) == doctest::Approx(1.0));
    // degree 1 is sqrt(d+1) z since int z^2 = 1/(d+1)
    CHECK(gegenbauer_eval(d, 1, 0.3) ==
          doctest::Approx(std::sqrt(d + 1.0) * 0.3).epsilon(1e-13));
    const int L = 12;
    auto rule = gauss_jacobi_rule(d, L + 4);
    std::vector<double> p;
    for (int a = 0; a <= L; ++a)
      for (int b = a; b <= L; ++b) {
        double ip = 0.0;
        for (int i = 0; i < rule->n; ++i) {
          gegenbauer_ladder(d, L, rule->nodes[i], p);
          ip += rule->weights[i] * p[a] * p[b];
        }
        CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
      }
  }
}

TEST_CASE("gegenbauer modes diagonalize the ultraspherical operator") {
  // L p = (1-z^2) p'' - d z p' = -ell(ell+d-1) p
  for (int d : {1, 2, 4}) {
    std::vector<double> p, dp, d2p;
    for (double z : {-0.8, -0.2, 0.5, 0.9}) {
      gegenbauer_ladder(d, 10, z, p, &dp, &d2p);
      for (int ell = 0; ell <= 10; ++ell) {
        const double lhs = (1.0 - z * z) * d2p[ell] - d * z * dp[ell];
        const double rhs = -static_cast<double>(sphere_eigenvalue(d, ell)) * p[ell];
        CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("gauss-hermite rule: gaussian moments and orthonormality") {
  auto rule = gauss_hermite_rule(48);
  double wsum = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
  for (int i = 0; i < rule->n; ++i) {
    const double x = rule->nodes[i], w = rule->weights[i];
    wsum += w;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
    m6 += w * std::pow(x, 6);
  }
  CHECK(std::abs(wsum - 1.0) < 1e-13);
  CHECK(std::abs(m2 - 1.0) < 1e-12);
  CHECK(std::abs(m4 - 3.0) < 1e-11);
  CHECK(std::abs(m6 - 15.0) < 1e-10);

  std::vector<double> h;
  for (int a = 0; a <= 10; ++a)
    for (int b = a; b <= 10; ++b) {
      double ip = 0.0;
      for (int i = 0; i < rule->n; ++i) {
        hermite_ladder(10, rule->nodes[i], h);
        ip += rule->weights[i] * h[a] * h[b];
      }
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
  CHECK_THROWS_AS(gauss_hermite_rule(1000), CapacityError);
}
