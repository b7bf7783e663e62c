// Batch front end: reproducible computation runs and table/plot-data emission.
// Exit codes: 0 success, 2 domain error, 3 numerical non-convergence, 4 I/O.

#include <CLI11.hpp>

#include <cstdint>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphstab/carre_du_champ.hpp"
#include "sphstab/deficit.hpp"
#include "sphstab/errors.hpp"
#include "sphstab/flow.hpp"
#include "sphstab/gaussian.hpp"
#include "sphstab/io.hpp"
#include "sphstab/spectral.hpp"
#include "sphstab/stability.hpp"
#include "sphstab/zonal.hpp"

namespace {

using namespace sphstab;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

std::vector<double> p_grid(double p_min, double p_max, int count) {
  std::vector<double> ps;
  if (count <= 1) {
    ps.push_back(p_min);
    return ps;
  }
  for (int i = 0; i < count; ++i)
    ps.push_back(p_min + (p_max - p_min) * i / (count - 1.0));
  return ps;
}

int cmd_constants(int d, double p_min, double p_max, int p_count, int k,
                  bool with_stability, const std::string& format,
                  const std::string& out_path, const std::string& curves_out,
                  int curve_points) {
  std::string body;
  nlohmann::json rows = nlohmann::json::array();
  if (format == "csv") {
    std::vector<std::string> head = {"d",       "p",       "k",      "lambda_k",
                                     "zeta_k1", "eta_k1",  "C_dpk",  "gamma_heat",
                                     "m_minus", "m_plus"};
    if (with_stability) head.push_back("S_dp");
    body += csv_line(head);
  }
  for (double p : p_grid(p_min, p_max, p_count)) {
    const Params params(d, p);
    const double c = improved_constant(params, k);
    const double zk = params.is_log_case() ? 0.0 : zeta_j(params, k + 1);
    const double ek = eta_j(d, k + 1);
    double gam = std::numeric_limits<double>::quiet_NaN();
    if (p > 1.0 && (d == 1 || p <= two_sharp(d))) gam = gamma_heat(d, p);
    double m_lo = std::numeric_limits<double>::quiet_NaN();
    double m_hi = std::numeric_limits<double>::quiet_NaN();
    if (p > 2.0 && p < two_star(d)) {
      const MRange r = m_range(d, p);
      m_lo = r.m_minus;
      m_hi = r.m_plus;
    }
    double s_dp = std::numeric_limits<double>::quiet_NaN();
    if (with_stability && p > 1.0) s_dp = assemble_S(d, p).S;
    if (format == "csv") {
      std::vector<std::string> row = {std::to_string(d),
                                      format_sci(p),
                                      std::to_string(k),
                                      format_sci(lambda_j(d, k)),
                                      format_sci(zk),
                                      format_sci(ek),
                                      format_sci(c),
                                      format_sci(gam),
                                      format_sci(m_lo),
                                      format_sci(m_hi)};
      if (with_stability) row.push_back(format_sci(s_dp));
      body += csv_line(row);
    } else {
      nlohmann::json row = {{"d", d},           {"p", p},
                            {"k", k},           {"lambda_k", lambda_j(d, k)},
                            {"zeta_k1", zk},    {"eta_k1", ek},
                            {"C_dpk", c},       {"gamma_heat", gam},
                            {"m_minus", m_lo},  {"m_plus", m_hi}};
      if (with_stability) row["S_dp"] = s_dp;
      rows.push_back(row);
    }
  }
  if (format != "csv") body = rows.dump(2) + "\n";
  emit(out_path, body);

  if (!curves_out.empty()) {
    const double p = p_min;
    std::string csv = csv_line({"s", "phi", "phi_mp", "phi_c"});
    const double s_hi =
        (p > 2.0) ? (1.0 / (p - 2.0)) * (1.0 - 1e-6) : 2.0;
    const bool have_mp = p > 2.0 && p < two_star(d);
    const CdcParams cdc =
        have_mp ? make_cdc(d, p, canonical_m(p)) : CdcParams{};
    const bool have_heat = p > 1.0 && (d == 1 || p <= two_sharp(d));
    for (int i = 0; i <= curve_points; ++i) {
      const double s = s_hi * i / curve_points;
      const double v_phi = have_heat ? phi(s, d, p) : std::numeric_limits<double>::quiet_NaN();
      const double v_mp = have_mp ? phi_mp(s, cdc) : std::numeric_limits<double>::quiet_NaN();
      const double v_c =
          (p > 2.0 && i > 0) ? phi_c(s, 0.5, d, p) : 0.0;
      csv += csv_line({format_sci(s), format_sci(v_phi), format_sci(v_mp), format_sci(v_c)});
    }
    write_text_file(curves_out, csv);
  }
  return 0;
}

ZonalFn build_family(const std::string& family, int d, double eps,
                     std::uint64_t seed, int k_min) {
  if (family == "random_highmode") return random_highmode(d, seed, k_min);
  return test_family(family, d, eps);
}

int cmd_deficit(int d, double p, const std::string& family, double eps,
                std::uint64_t seed, int k_min, const std::string& format,
                const std::string& out_path) {
  const ZonalFn f = build_family(family, d, eps, seed, k_min);
  const DeficitReport r = deficit_report(f, p);
  if (format == "csv") {
    std::string body = csv_line({"field", "value"});
    body += csv_line({"entropy", format_sci(r.entropy)});
    body += csv_line({"fisher", format_sci(r.fisher)});
    body += csv_line({"deficit", format_sci(r.deficit)});
    body += csv_line({"grad_pi1_sq", format_sci(r.grad_pi1_sq)});
    body += csv_line({"grad_rest_sq", format_sci(r.grad_rest_sq)});
    if (eps > 0.0)
      body += csv_line({"deficit_over_eps4", format_sci(r.deficit / (eps * eps * eps * eps))});
    for (const auto& a : r.audits)
      body += csv_line({"audit_" + a.name, a.pass ? "pass" : (a.applicable ? "fail" : "n/a")});
    emit(out_path, body);
  } else {
    nlohmann::json j = nlohmann::json::parse(r.to_json());
    if (eps > 0.0) j["deficit_over_eps4"] = r.deficit / (eps * eps * eps * eps);
    emit(out_path, j.dump(2) + "\n");
  }
  return r.all_pass() ? 0 : 1;
}

int cmd_flow(int d, double p, const std::string& m_spec, double t_end,
             double sample_dt, const std::string& family, double eps,
             std::uint64_t seed, int k_min, const std::string& out_path) {
  double m = 1.0;
  if (m_spec == "auto")
    m = (p > 2.0) ? canonical_m(p) : 1.0;
  else
    m = std::stod(m_spec);
  const FlowSolver solver(d, p, m);
  const ZonalFn f0 = build_family(family, d, eps, seed, k_min);
  const FlowTrace trace = solver.run(f0, t_end, sample_dt);
  std::string csv = csv_line({"t", "e", "i", "deficit", "residual_EDO", "phi_gap"});
  for (const auto& s : trace.samples)
    csv += csv_line({format_sci(s.t), format_sci(s.entropy), format_sci(s.fisher),
                     format_sci(s.deficit), format_sci(trace.edo_residual),
                     format_sci(s.phi_gap)});
  emit(out_path, csv);
  return 0;
}

int cmd_stability(int d, double p, const std::string& out_path) {
  const StabilityBreakdown b = assemble_S(d, p);
  emit(out_path, breakdown_to_json(b) + "\n");
  return 0;
}

int cmd_gaussian(double p, int k_max, std::uint64_t seed, const std::string& format,
                 const std::string& out_path) {
  if (format == "csv") {
    std::string csv = csv_line({"k", "kappa_k"});
    for (int k = 1; k <= k_max; ++k)
      csv += csv_line({std::to_string(k), format_sci(mode_constant(p, k))});
    emit(out_path, csv);
  } else {
    const HermiteFn f = random_hermite(seed, k_max, true, false);
    const TheoremB1Report r = verify_theorem_b1(f, p);
    nlohmann::json j;
    j["p"] = p;
    j["nelson_time"] = nelson_time(p);
    j["deficit"] = r.deficit;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["base_margin"] = r.base_margin;
    j["gross_margin"] = r.gross_margin;
    j["hypercontractivity_margin"] = r.hypercontractivity_margin;
    j["pass"] = r.pass;
    nlohmann::json table = nlohmann::json::array();
    for (int k = 1; k <= k_max; ++k)
      table.push_back({{"k", k}, {"kappa_k", mode_constant(p, k)}});
    j["mode_constants"] = table;
    emit(out_path, j.dump(2) + "\n");
    return r.pass ? 0 : 1;
  }
  return 0;
}

int cmd_sweep(const std::vector<int>& ds, int p_count, const std::string& out_path) {
  struct Row {
    int d;
    double p, lambda, theta_pd, S;
    std::string branch;
  };
  std::vector<std::future<std::vector<Row>>> futs;
  for (int d : ds) {
    futs.push_back(std::async(std::launch::async, [d, p_count]() {
      std::vector<Row> rows;
      const double hi = std::isfinite(two_star(d)) ? two_star(d) : 50.0;
      for (int i = 1; i <= p_count; ++i) {
        const double p = 1.0 + (hi - 1.0) * i / (p_count + 1.0);
        if (!(p > 1.0) || !(p < hi)) continue;
        const StabilityBreakdown b = assemble_S(d, p);
        rows.push_back({d, p, b.form.lambda, b.theta_pd, b.S, b.branch});
      }
      return rows;
    }));
  }
  std::string csv = csv_line({"d", "p", "lambda", "theta_pd", "S_dp", "branch"});
  for (auto& f : futs)
    for (const Row& r : f.get())
      csv += csv_line({std::to_string(r.d), format_sci(r.p), format_sci(r.lambda),
                       format_sci(r.theta_pd), format_sci(r.S), r.branch});
  emit(out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical interpolation-inequality constants and audits"};
  app.require_subcommand(1);
  app.set_config("--config");

  int d = 3, k = 1, p_count = 1, k_min = 2, k_max = 16, curve_points = 200;
  double p = 3.0, p_max_opt = 0.0, eps = 0.1, t_end = 1.0, sample_dt = 0.01;
  std::uint64_t seed = 1;
  std::string format = "csv", out_path, family = "one_plus_eps_axis";
  std::string m_spec = "auto", curves_out;
  bool with_stability = false;
  std::vector<int> ds = {1, 2, 3, 4, 5};

  auto* constants = app.add_subcommand("constants", "spectral and flow constants");
  constants->add_option("--d", d)->required();
  constants->add_option("--p", p)->required();
  constants->add_option("--p-max", p_max_opt);
  constants->add_option("--p-count", p_count);
  constants->add_option("--k", k);
  constants->add_flag("--with-stability", with_stability);
  constants->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  constants->add_option("--out", out_path);
  constants->add_option("--curves-out", curves_out);
  constants->add_option("--curve-points", curve_points);

  auto* deficit = app.add_subcommand("deficit", "deficit report for a test function");
  deficit->add_option("--d", d)->required();
  deficit->add_option("--p", p)->required();
  deficit->add_option("--family", family);
  deficit->add_option("--eps", eps);
  deficit->add_option("--seed", seed);
  deficit->add_option("--k-min", k_min);
  deficit->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  deficit->add_option("--out", out_path);

  auto* flow = app.add_subcommand("flow", "diffusion-flow trace with audits");
  flow->add_option("--d", d)->required();
  flow->add_option("--p", p)->required();
  flow->add_option("--m", m_spec);
  flow->add_option("--t-end", t_end);
  flow->add_option("--sample-dt", sample_dt);
  flow->add_option("--family", family);
  flow->add_option("--eps", eps);
  flow->add_option("--seed", seed);
  flow->add_option("--k-min", k_min);
  flow->add_option("--out", out_path);

  auto* stability = app.add_subcommand("stability", "global stability breakdown");
  stability->add_option("--d", d)->required();
  stability->add_option("--p", p)->required();
  stability->add_option("--out", out_path);

  auto* gaussian = app.add_subcommand("gaussian", "Gaussian/Hermite audits");
  gaussian->add_option("--p", p)->required();
  gaussian->add_option("--k-max", k_max);
  gaussian->add_option("--seed", seed);
  gaussian->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  gaussian->add_option("--out", out_path);

  auto* sweep = app.add_subcommand("sweep", "stability-constant sweep table");
  sweep->add_option("--d-list", ds);
  sweep->add_option("--p-count", p_count)->default_val(10);
  sweep->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (constants->parsed())
      return cmd_constants(d, p, p_max_opt > 0.0 ? p_max_opt : p,
                           p_max_opt > 0.0 ? p_count : 1, k, with_stability, format,
                           out_path, curves_out, curve_points);
    if (deficit->parsed())
      return cmd_deficit(d, p, family, eps, seed, k_min, format, out_path);
    if (flow->parsed())
      return cmd_flow(d, p, m_spec, t_end, sample_dt, family, eps, seed, k_min, out_path);
    if (stability->parsed()) return cmd_stability(d, p, out_path);
    if (gaussian->parsed()) return cmd_gaussian(p, k_max, seed, format, out_path);
    if (sweep->parsed()) return cmd_sweep(ds, p_count, out_path);
  } catch (const sphstab::IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 4;
  } catch (const sphstab::ConvergenceError& e) {
    std::cerr << "error: non-convergence: " << e.what() << "\n";
    return 3;
  } catch (const sphstab::DomainError& e) {
    std::cerr << "error: domain: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
