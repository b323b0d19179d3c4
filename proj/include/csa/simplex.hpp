#pragma once

#include <vector>

namespace csa {

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;       // optimal objective
  std::vector<double> x;    // optimal point
};

// Dense two-phase primal simplex with Bland's rule (lowest-index entering
// and leaving variables, so degenerate optima cannot cycle):
//   maximize c.x  subject to  A x <= b,  x >= 0.
LpResult simplex_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c);

}  // namespace csa
