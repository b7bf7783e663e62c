#pragma once

#include <vector>

#include "sphstab/carre_du_champ.hpp"
#include "sphstab/zonal.hpp"

namespace sphstab {

// State of the zonal diffusion flow
//   du/dt = u^{-p(1-m)} ( L u + (mp-1)(1-z^2)(u')^2/u ),
// L u = (1-z^2)u'' - d z u' (ultraspherical operator).
struct FlowState {
  double t = 0.0;
  int d = 1;
  double p = 2.0;
  double m = 1.0;
  CdcParams cdc;                 // derived (beta, gamma, delta, zeta) pack
  std::vector<double> u;         // strictly positive grid profile
  std::shared_ptr<const QuadratureRule> rule;
  int L = 48;                    // spectral degree cap
};

struct FlowSample {
  double t = 0.0;
  double entropy = 0.0;        // E_p[u]
  double fisher = 0.0;         // ||grad u||_2^2
  double deficit = 0.0;
  double norm_p = 0.0;
  double min_u = 0.0;
  double phi_gap = 0.0;        // fisher - d ||u||_p^2 phi(entropy/||u||_p^2)
};

struct FlowTrace {
  int d = 1;
  double p = 2.0;
  double m = 1.0;
  std::vector<FlowSample> samples;

  // audit summary
  double mass_drift = 0.0;          // max |  ||u||_p - ||u0||_p | / ||u0||_p
  double deficit_increase = 0.0;    // max positive jump of the deficit
  double edo_residual = 0.0;        // max positive violation of (i-de)' bound
  double phi_violation = 0.0;       // max positive d*phi(e) - i
  double min_u = 0.0;
  bool decayed = false;             // fisher decayed by the expected envelope
};

class FlowSolver {
 public:
  FlowSolver(int d, double p, double m, int L = 48, int order = 128);

  /// One RK4 step; positivity loss rejects the step and halves dt (up to
  /// max_halvings, then BlowUp). Returns the dt actually taken.
  double step(FlowState& state, double dt) const;

  FlowState make_state(const ZonalFn& initial) const;
  FlowSample sample(const FlowState& state) const;

  /// Integrates to t_end, sampling every sample_dt, and audits the trace.
  FlowTrace run(const ZonalFn& initial, double t_end, double sample_dt) const;

  /// Suggested stable step from the spectral CFL heuristic.
  double suggested_dt(const FlowState& state) const;

  /// Barrier check: i - d*theta*phi_theta(e) >= -tol along the trajectory for
  /// each theta in the grid, plus the quadratic lower bound at sample times.
  struct ImprovedEntropyReport {
    std::vector<double> theta_grid;
    std::vector<double> worst_margin;   // min over time of i - d theta phi_theta(e)
    double quadratic_margin = 0.0;      // min of (i - d e) - (gamma~/2) d e^2
    bool pass = false;
  };
  ImprovedEntropyReport verify_improved_entropy(const ZonalFn& initial, double t_end,
                                                double sample_dt,
                                                const std::vector<double>& theta_grid) const;

 private:
  std::vector<double> time_derivative(const FlowState& state,
                                      const std::vector<double>& u) const;

  int d_;
  double p_;
  double m_;
  int L_;
  std::shared_ptr<const QuadratureRule> rule_;
  CdcParams cdc_;
};

}  // namespace sphstab
