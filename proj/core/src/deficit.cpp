#include "sphstab/deficit.hpp"

#include <cmath>

#include <json.hpp>

#include "sphstab/carre_du_champ.hpp"
#include "sphstab/errors.hpp"
#include "sphstab/spectral.hpp"
#include "sphstab/stability.hpp"

namespace sphstab {

bool DeficitReport::all_pass() const {
  for (const auto& a : audits)
    if (a.applicable && !a.pass) return false;
  return true;
}

namespace {

InequalityAudit make_audit(const std::string& name, bool applicable, double lhs,
                           double rhs, double tol) {
  InequalityAudit a;
  a.name = name;
  a.applicable = applicable;
  a.lhs = lhs;
  a.rhs = rhs;
  a.margin = lhs - rhs;
  a.pass = !applicable || a.margin >= -tol;
  return a;
}

}  // namespace

DeficitReport deficit_report(const ZonalFn& f, double p, bool with_stability) {
  const int d = f.dim();
  const Params params(d, p);
  DeficitReport r;
  r.d = d;
  r.p = p;
  r.entropy = f.entropy(p);
  r.fisher = f.grad_norm_sq();
  r.deficit = r.fisher - d * r.entropy;
  const double c1 = f.coeffs()[1];
  r.grad_pi1_sq = lambda_j(d, 1) * c1 * c1;
  r.grad_rest_sq = std::max(0.0, r.fisher - r.grad_pi1_sq);
  r.mean = f.mean();
  r.norm2 = std::sqrt(f.norm2_sq());
  r.norm_p = f.norm_p(p);
  r.tail_energy = f.tail_energy();

  const double np_sq = r.norm_p * r.norm_p;
  const bool pi1_free = r.grad_pi1_sq <= 1e-20 * std::max(1.0, r.fisher);

  // base inequality
  r.audits.push_back(make_audit("interpolation", true, r.deficit, 0.0, 1e-9));

  // improved constants under orthogonality, k = 1, 2, 3
  for (int k = 1; k <= 3; ++k) {
    const double cdpk = improved_constant(params, k);
    double grad_rest_k = r.fisher;
    for (int ell = 1; ell <= std::min(k, f.degree_cap()); ++ell)
      grad_rest_k -= lambda_j(d, ell) * f.coeffs()[static_cast<size_t>(ell)] *
                     f.coeffs()[static_cast<size_t>(ell)];
    grad_rest_k = std::max(0.0, grad_rest_k);
    r.audits.push_back(make_audit("improved_k" + std::to_string(k), true, r.deficit,
                                  cdpk * grad_rest_k, 1e-8));
  }

  // flow-improvement bounds
  if (p == 2.0) {
    const double g = gamma_heat(d, p);
    const double rhs = 0.5 * g * r.fisher * r.fisher /
                       (g * r.fisher + d * r.norm2 * r.norm2);
    r.audits.push_back(make_audit("quartic_p2", true, r.deficit, rhs, 1e-8));
  }
  const bool heat_ok = p > 1.0 && (d == 1 || p < two_sharp(d));
  if (heat_ok) {
    const double rhs = d * np_sq * psi(r.fisher / (d * np_sq), d, p);
    r.audits.push_back(make_audit("psi_heat", true, r.deficit, rhs, 1e-8));
  }
  if (p > 2.0 && p < two_star(d)) {
    const CdcParams cdc = make_cdc(d, p, canonical_m(p));
    const double rhs = d * np_sq * psi_mp(r.fisher / (d * np_sq), cdc);
    r.audits.push_back(make_audit("psi_fast_diffusion", true, r.deficit, rhs, 1e-8));
  }

  // orthogonality-improved statements (only when Pi_1 F = 0)
  const double c_k1 = improved_constant_k1(d, p);
  r.audits.push_back(make_audit(p == 2.0 ? "improved_orth_p2" : "improved_orth",
                                pi1_free, r.deficit, c_k1 * r.fisher, 1e-8));

  if (with_stability && p > 1.0) {
    const StabilityBreakdown b = assemble_S(d, p);
    const GlobalAuditReport g = audit_global(f, p, b);
    r.audits.push_back(
        make_audit("global_stability", true, g.deficit, g.rhs_main, 1e-8));
    r.audits.push_back(
        make_audit("global_stability_l2_denominator", true, g.deficit, g.rhs_l2, 1e-8));
    if (p == 2.0)
      r.audits.push_back(make_audit("global_stability_half_d_denominator", true,
                                    g.deficit, g.rhs_p2, 1e-8));
  }
  return r;
}

std::string DeficitReport::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["p"] = p;
  j["entropy"] = entropy;
  j["fisher"] = fisher;
  j["deficit"] = deficit;
  j["grad_pi1_sq"] = grad_pi1_sq;
  j["grad_rest_sq"] = grad_rest_sq;
  j["mean"] = mean;
  j["norm2"] = norm2;
  j["norm_p"] = norm_p;
  j["tail_energy"] = tail_energy;
  nlohmann::json audits_json = nlohmann::json::array();
  for (const auto& a : audits) {
    audits_json.push_back({{"name", a.name},
                           {"applicable", a.applicable},
                           {"lhs", a.lhs},
                           {"rhs", a.rhs},
                           {"margin", a.margin},
                           {"pass", a.pass}});
  }
  j["audits"] = audits_json;
  return j.dump(2);
}

}  // namespace sphstab
