#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csa/core_polytope.hpp"

namespace csa {

inline constexpr double kPrimalTol = 1e-9;
inline constexpr double kKktTol = 1e-8;
inline constexpr int kMaxQpIterations = 10000;
inline constexpr int kMaxSeparationRounds = 1000;

struct KKTCertificate {
  double stationarity_residual = 0.0;  // max |p - r - A'lambda + mu - nu|
  double primal_residual = 0.0;        // max constraint/bound violation
  double comp_slack_residual = 0.0;    // max |multiplier * slack|
};

struct ProjectionResult {
  std::vector<double> prices;             // in polytope coordinate order
  std::vector<double> multipliers_core;   // lambda, per polytope row
  std::vector<double> multipliers_upper;  // mu, per winner (price <= bid)
  std::vector<double> multipliers_lower;  // nu, per winner (price >= lower)
  std::vector<double> multipliers_extra;  // per general side constraint
  int iterations = 0;
  int separation_rounds = 0;
  bool multipliers_nonunique = false;  // active rows were linearly dependent
  KKTCertificate certificate;
  // Squared distance to the reference after each constraint-generation
  // round; nondecreasing by construction.
  std::vector<double> objective_history;
};

struct WarmStart {
  std::vector<double> start;       // feasible point to begin from
  std::vector<int> active_rows;    // polytope row indices active at start
};

// Dense side constraint coeffs.p >= rhs, used for the minimum-revenue band.
struct GeneralConstraint {
  std::vector<double> coeffs;
  double rhs;
};

// Euclidean projection of `reference` onto the polytope by a primal
// active-set method (identity Hessian, lowest-index pivoting). The result
// carries a KKT certificate with residuals <= kKktTol.
// Throws NumericalFailureError with the best iterate's residuals if the
// pivot cap is exceeded.
ProjectionResult project_onto_polytope(const CorePolytope& polytope,
                                       const std::vector<double>& reference,
                                       const std::optional<WarmStart>& warm = std::nullopt,
                                       const std::vector<GeneralConstraint>& extra_rows = {});

struct CoreProjection {
  ProjectionResult result;
  CorePolytope polytope;  // rows generated by separation
};

// Projection onto the full core via constraint generation: project, separate,
// add the most violated coalition row, repeat. Seed rows (e.g. from a
// previous solve of a nearby instance) make warm sweeps cheap.
CoreProjection project_onto_core(const AuctionInstance& instance, const Coalition& winners,
                                 const std::map<std::string, double>& reference,
                                 const std::vector<CoreConstraint>* seed_rows = nullptr);

// Re-derives every optimality condition (feasibility, multiplier signs,
// stationarity, complementary slackness) from scratch.
bool verify_kkt(const ProjectionResult& result, const CorePolytope& polytope,
                const std::vector<double>& reference);

// Ordered price vector -> map keyed by winner id.
std::map<std::string, double> price_map(const CorePolytope& polytope,
                                        const std::vector<double>& prices);

// Reference helpers.
std::vector<double> reference_in_order(const CorePolytope& polytope,
                                       const std::map<std::string, double>& reference);
std::map<std::string, double> to_double_prices(const std::map<std::string, Money>& prices);

}  // namespace csa
