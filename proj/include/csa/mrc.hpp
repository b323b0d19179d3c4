#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "csa/core_polytope.hpp"
#include "csa/projection.hpp"

namespace csa {

// Half-width of the two-sided revenue-equality band in the selection QP.
inline constexpr double kRevenueBand = 1e-9;

struct RevenueCertificate {
  double lp_min_revenue = 0.0;     // LP optimum over the generated rows
  double attained_revenue = 0.0;   // revenue of the selected prices
  std::vector<int> binding_rows;   // generated rows tight at the selection
  bool separation_clean = false;   // no blocking coalition at the selection
};

struct MrcResult {
  double min_revenue = 0.0;
  std::vector<double> prices;  // in polytope coordinate order
  CorePolytope polytope;       // rows generated along the way
  ProjectionResult projection;
  RevenueCertificate revenue_certificate;
};

// Minimum total price over the given polytope (rows + boxes), solved by
// dense simplex. Returns the optimum and an attaining vertex.
std::pair<double, std::vector<double>> min_revenue_over(const CorePolytope& polytope);

// Minimum seller revenue over the full core, via the same
// constraint-generation loop as the projection path.
double min_core_revenue(const AuctionInstance& instance, const Coalition& winners);

// Two-stage minimum-revenue-core selection: LP for the revenue floor, then
// an equality-constrained projection of the reference onto that floor.
MrcResult mrc_quadratic_price(const AuctionInstance& instance, const Coalition& winners,
                              const std::map<std::string, double>& reference,
                              const std::vector<CoreConstraint>* seed_rows = nullptr);

}  // namespace csa
