#pragma once

#include <string>
#include <vector>

#include "sphstab/zonal.hpp"

namespace sphstab {

struct InequalityAudit {
  std::string name;
  bool applicable = false;
  double lhs = 0.0;  // deficit
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
};

// Everything the interpolation inequalities say about one function.
struct DeficitReport {
  int d = 1;
  double p = 2.0;
  double entropy = 0.0;       // E_p[F]
  double fisher = 0.0;        // ||grad F||_2^2
  double deficit = 0.0;       // fisher - d * entropy
  double grad_pi1_sq = 0.0;   // ||grad Pi_1 F||_2^2
  double grad_rest_sq = 0.0;  // ||grad (Id-Pi_1) F||_2^2
  double mean = 0.0;
  double norm2 = 0.0;
  double norm_p = 0.0;
  double tail_energy = 0.0;
  std::vector<InequalityAudit> audits;

  bool all_pass() const;
  std::string to_json() const;
};

/// Evaluates the deficit and audits every inequality applicable at (d, p):
/// the base interpolation inequality, the orthogonality-improved constants
/// (k = 1,2,3; applicable when the corresponding projection vanishes), the
/// flow-improvement bounds, and the global stability inequality.
/// with_stability = false skips the (more expensive) global constant.
DeficitReport deficit_report(const ZonalFn& f, double p, bool with_stability = true);

}  // namespace sphstab
