#include "sphstab/zonal.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sphstab/errors.hpp"
#include "sphstab/rng.hpp"
#include "sphstab/spectral.hpp"

namespace sphstab {

namespace {

int default_order(int L) { return 2 * (L + 1) + 8; }

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
}

}  // namespace

void ZonalFn::synthesize() {
  const int L = degree_cap();
  const int n = rule_->n;
  values_.assign(static_cast<size_t>(n), 0.0);
  std::vector<double> p;
  for (int i = 0; i < n; ++i) {
    gegenbauer_ladder(d_, L, rule_->nodes[static_cast<size_t>(i)], p);
    double s = 0.0;
    for (int ell = 0; ell <= L; ++ell) s += coeffs_[static_cast<size_t>(ell)] * p[static_cast<size_t>(ell)];
    values_[static_cast<size_t>(i)] = s;
  }
  // round-trip: re-analyze and compare
  double resid = 0.0;
  std::vector<double> back(static_cast<size_t>(L) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    gegenbauer_ladder(d_, L, rule_->nodes[static_cast<size_t>(i)], p);
    const double wv = rule_->weights[static_cast<size_t>(i)] * values_[static_cast<size_t>(i)];
    for (int ell = 0; ell <= L; ++ell) back[static_cast<size_t>(ell)] += wv * p[static_cast<size_t>(ell)];
  }
  for (int ell = 0; ell <= L; ++ell)
    resid = std::max(resid, std::abs(back[static_cast<size_t>(ell)] - coeffs_[static_cast<size_t>(ell)]));
  sync_residual_ = resid;
  double parseval = 0.0;
  for (double c : coeffs_) parseval += c * c;
  tail_energy_ = std::abs(norm2_sq() - parseval);
}

ZonalFn ZonalFn::from_coeffs(int d, std::vector<double> coeffs, int order) {
  if (coeffs.empty()) throw DomainError("ZonalFn: empty coefficient ladder");
  check_finite(coeffs, "ZonalFn::from_coeffs");
  ZonalFn f;
  f.d_ = d;
  f.coeffs_ = std::move(coeffs);
  const int L = f.degree_cap();
  f.rule_ = gauss_jacobi_rule(d, order > 0 ? order : default_order(L));
  f.synthesize();
  return f;
}

ZonalFn ZonalFn::from_values(int d, std::shared_ptr<const QuadratureRule> rule,
                             std::vector<double> values, int L) {
  if (!rule || static_cast<int>(values.size()) != rule->n)
    throw DomainError("ZonalFn::from_values: size mismatch");
  check_finite(values, "ZonalFn::from_values");
  ZonalFn f;
  f.d_ = d;
  f.rule_ = std::move(rule);
  f.values_ = std::move(values);
  f.coeffs_.assign(static_cast<size_t>(L) + 1, 0.0);
  std::vector<double> p;
  for (int i = 0; i < f.rule_->n; ++i) {
    gegenbauer_ladder(d, L, f.rule_->nodes[static_cast<size_t>(i)], p);
    const double wv = f.rule_->weights[static_cast<size_t>(i)] * f.values_[static_cast<size_t>(i)];
    for (int ell = 0; ell <= L; ++ell) f.coeffs_[static_cast<size_t>(ell)] += wv * p[static_cast<size_t>(ell)];
  }
  double parseval = 0.0;
  for (double c : f.coeffs_) parseval += c * c;
  f.tail_energy_ = std::abs(f.norm2_sq() - parseval);
  f.sync_residual_ = f.tail_energy_;
  return f;
}

ZonalFn ZonalFn::from_profile(int d, const std::function<double(double)>& fn,
                              int L0, double tail_tol) {
  int L = L0;
  for (;;) {
    auto rule = gauss_jacobi_rule(d, default_order(L));
    std::vector<double> vals(static_cast<size_t>(rule->n));
    for (int i = 0; i < rule->n; ++i) vals[static_cast<size_t>(i)] = fn(rule->nodes[static_cast<size_t>(i)]);
    ZonalFn f = from_values(d, rule, std::move(vals), L);
    if (f.tail_energy_ < tail_tol || L >= 1024) return f;
    L *= 2;
  }
}

double ZonalFn::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ZonalFn::norm_p(double q) const {
  if (!(q >= 1.0)) throw DomainError("norm_p: q must be >= 1");
  double s = 0.0;
  for (int i = 0; i < rule_->n; ++i)
    s += rule_->weights[static_cast<size_t>(i)] * std::pow(std::abs(values_[static_cast<size_t>(i)]), q);
  return std::pow(s, 1.0 / q);
}

double ZonalFn::norm2_sq() const {
  double s = 0.0;
  for (int i = 0; i < rule_->n; ++i)
    s += rule_->weights[static_cast<size_t>(i)] * values_[static_cast<size_t>(i)] * values_[static_cast<size_t>(i)];
  return s;
}

double ZonalFn::grad_norm_sq() const {
  double s = 0.0;
  for (int ell = 1; ell <= degree_cap(); ++ell)
    s += lambda_j(d_, ell) * coeffs_[static_cast<size_t>(ell)] * coeffs_[static_cast<size_t>(ell)];
  return s;
}

std::vector<double> ZonalFn::derivative_values() const {
  const int L = degree_cap();
  std::vector<double> out(static_cast<size_t>(rule_->n), 0.0);
  std::vector<double> p, dp;
  for (int i = 0; i < rule_->n; ++i) {
    gegenbauer_ladder(d_, L, rule_->nodes[static_cast<size_t>(i)], p, &dp);
    double s = 0.0;
    for (int ell = 1; ell <= L; ++ell) s += coeffs_[static_cast<size_t>(ell)] * dp[static_cast<size_t>(ell)];
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

std::vector<double> ZonalFn::second_derivative_values() const {
  const int L = degree_cap();
  std::vector<double> out(static_cast<size_t>(rule_->n), 0.0);
  std::vector<double> p, dp, d2p;
  for (int i = 0; i < rule_->n; ++i) {
    gegenbauer_ladder(d_, L, rule_->nodes[static_cast<size_t>(i)], p, &dp, &d2p);
    double s = 0.0;
    for (int ell = 1; ell <= L; ++ell) s += coeffs_[static_cast<size_t>(ell)] * d2p[static_cast<size_t>(ell)];
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

double ZonalFn::grad_norm_sq_quadrature() const {
  const std::vector<double> df = derivative_values();
  double s = 0.0;
  for (int i = 0; i < rule_->n; ++i) {
    const double z = rule_->nodes[static_cast<size_t>(i)];
    s += rule_->weights[static_cast<size_t>(i)] * (1.0 - z * z) * df[static_cast<size_t>(i)] * df[static_cast<size_t>(i)];
  }
  return s;
}

double ZonalFn::entropy(double p) const {
  const double n2 = norm2_sq();
  if (n2 <= 0.0) throw DegenerateInputError("entropy: zero function");
  if (std::abs(p - 2.0) < 1e-8) {
    // E_2[F] = 1/2 int F^2 log(F^2/||F||_2^2)
    double s = 0.0;
    for (int i = 0; i < rule_->n; ++i) {
      const double v2 = values_[static_cast<size_t>(i)] * values_[static_cast<size_t>(i)];
      if (v2 > 0.0) s += rule_->weights[static_cast<size_t>(i)] * v2 * std::log(v2 / n2);
    }
    return 0.5 * s;
  }
  if (!(p >= 1.0)) throw DomainError("entropy: p must be >= 1");
  const double np = norm_p(p);
  return (np * np - n2) / (p - 2.0);
}

ZonalFn ZonalFn::project(int k) const {
  if (k < 0) throw DomainError("project: k must be >= 0");
  std::vector<double> c(coeffs_.size(), 0.0);
  for (int ell = 1; ell <= std::min(k, degree_cap()); ++ell) c[static_cast<size_t>(ell)] = coeffs_[static_cast<size_t>(ell)];
  return from_coeffs(d_, std::move(c), rule_->n);
}

std::string ZonalFn::to_json() const {
  nlohmann::json j;
  j["d"] = d_;
  j["L"] = degree_cap();
  j["coefficients"] = coeffs_;
  return j.dump();
}

ZonalFn ZonalFn::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int d = j.at("d").get<int>();
  std::vector<double> c = j.at("coefficients").get<std::vector<double>>();
  if (static_cast<int>(c.size()) != j.at("L").get<int>() + 1)
    throw IoError("ZonalFn::from_json: inconsistent L");
  return from_coeffs(d, std::move(c));
}

ZonalFn test_family(const std::string& name, int d, double eps) {
  const double yd = std::sqrt((d + 1.0) / d);
  if (name == "one_plus_eps_axis")
    return ZonalFn::from_profile(d, [eps](double z) { return 1.0 + eps * z; }, 8);
  if (name == "Y")
    return ZonalFn::from_profile(d, [yd](double z) { return yd * z; }, 8);
  if (name == "Y2")
    return ZonalFn::from_profile(
        d, [yd, d](double z) { return yd * yd * z * z - 1.0 / d; }, 8);
  if (name == "Y3") {
    const double c = 3.0 * (d + 1.0) / (d * (d + 3.0));
    return ZonalFn::from_profile(
        d, [yd, c](double z) { return yd * yd * yd * z * z * z - c * yd * z; }, 8);
  }
  throw DomainError("test_family: unknown family '" + name + "'");
}

ZonalFn random_highmode(int d, std::uint64_t seed, int k_min, int L) {
  if (k_min < 1 || k_min > L / 2)
    throw DomainError("random_highmode: need 1 <= k_min <= L/2");
  Rng rng(seed);
  std::vector<double> c(static_cast<size_t>(L) + 1, 0.0);
  for (int ell = k_min; ell <= L / 2; ++ell) c[static_cast<size_t>(ell)] = rng.normal();
  double g = 0.0;
  for (int ell = 1; ell <= L; ++ell) g += lambda_j(d, ell) * c[static_cast<size_t>(ell)] * c[static_cast<size_t>(ell)];
  if (g <= 0.0) throw DegenerateInputError("random_highmode: degenerate draw");
  const double scale = 1.0 / std::sqrt(g);
  for (double& x : c) x *= scale;
  return ZonalFn::from_coeffs(d, std::move(c));
}

}  // namespace sphstab
