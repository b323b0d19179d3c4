#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csa/auction.hpp"
#include "csa/money.hpp"

namespace csa {

// Violation tolerance (money units) below which an outcome counts as
// unblocked. Exact-decimal bids keep genuine ties well clear of it.
inline constexpr double kViolationTol = 1e-9;

// One coalition core constraint: sum of prices over `indicator` >= rhs.
// The indicator marks winners outside the blocking coalition; the rhs is the
// total of losing bids inside it.
struct CoreConstraint {
  Coalition coalition;
  std::vector<std::uint8_t> indicator;  // over the polytope's winner order
  Money rhs;

  bool operator==(const CoreConstraint&) const = default;
};

// Working description of the core region: coalition rows plus per-winner
// price bounds. Pure lower/upper-bound rows are folded into the boxes.
struct CorePolytope {
  std::vector<std::string> winners;  // coordinate order, sorted
  std::vector<CoreConstraint> constraints;
  std::vector<Money> lower_bounds;
  std::vector<std::optional<Money>> upper_bounds;  // nullopt = unbounded
  std::vector<double> feasible_point;

  int coord(const std::string& winner) const;
  // Max violation of any row or bound at the given prices (0 if inside).
  double max_violation(const std::vector<double>& prices) const;
};

// Box-only polytope over the winner set: bounds [0, b], no rows yet.
CorePolytope make_box_polytope(const AuctionInstance& instance, const Coalition& winners);

// Row for a specific blocking coalition, in the polytope's coordinate order.
CoreConstraint constraint_for_coalition(const AuctionInstance& instance,
                                        const CorePolytope& polytope, const Coalition& c);

struct CoreMembership {
  bool in_core = false;
  // Violated coalitions with their violation amounts, worst first. Complete
  // for small instances (exhaustive check); otherwise holds the single most
  // violated coalition found by the separation oracle.
  std::vector<std::pair<Coalition, double>> violated;
};

// Tests the blocking condition for every feasible coalition.
// Prices must lie within [0, b] per winner (tolerance kViolationTol).
CoreMembership is_in_core(const AuctionInstance& instance, const Coalition& winners,
                          const std::map<std::string, double>& prices);

// Separation oracle: maximizes (coalition value at modified prices) minus
// current revenue via a weighted-coalition search. Empty result means no
// feasible coalition blocks the outcome at the given tolerance.
std::optional<std::pair<Coalition, double>> find_most_violated_coalition(
    const AuctionInstance& instance, const Coalition& winners,
    const std::map<std::string, double>& prices);

// Full core description by feasible-coalition enumeration. Throws
// ResourceLimitError if more than max_coalitions feasible coalitions exist.
// Single-winner rows fold into lower bounds; dominated rows are pruned.
CorePolytope enumerate_core_polytope(const AuctionInstance& instance, const Coalition& winners,
                                     std::size_t max_coalitions);

// Row list of enumerate_core_polytope (bounds folding still applies).
std::vector<CoreConstraint> enumerate_core_constraints(const AuctionInstance& instance,
                                                       const Coalition& winners,
                                                       std::size_t max_coalitions);

}  // namespace csa
