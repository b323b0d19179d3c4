#pragma once

#include <string>
#include <vector>

#include "csa/auction.hpp"
#include "csa/core_polytope.hpp"

namespace csa {

// Query tolerance around piecewise-linear breakpoints; slope evaluation
// inside this distance of a kink raises BoundaryPointError.
inline constexpr double kBreakpointTol = 1e-9;

// One spoke of the star market: its leaf items carry a winning and a losing
// single-item bid each, and one losing package bid covers the hub plus all
// leaves of the spoke.
struct Spoke {
  std::vector<Money> winning_leaf_bids;
  std::vector<Money> losing_leaf_bids;
  Money bundle_bid;
};

struct StarInstance {
  std::vector<Spoke> spokes;
  Money losing_hub_bid;

  void validate() const;
  int spoke_count() const { return static_cast<int>(spokes.size()); }
  int leaf_count(int j) const { return static_cast<int>(spokes[j].winning_leaf_bids.size()); }

  // Winning minus losing leaf bid; nonnegative by efficiency of the winners.
  double margin(int j, int k) const;
  double max_margin(int j) const;

  // Minimum hub bid that keeps the designated winners efficient; also the
  // hub winner's opportunity-cost price. Exact decimal.
  Money hub_vickrey() const;
  // Amount spoke j's package bid falls short of displacing the winners when
  // the hub winner bids exactly hub_vickrey(). Nonnegative.
  double bundle_slack(int j) const;

  // Smallest hub price making spoke j's sum constraint hold when every leaf
  // price sits at its losing bid; drives the minimum-revenue-core analysis.
  double spoke_floor(int j) const;
  // Second-largest spoke floor; -infinity when there is a single spoke.
  double second_spoke_floor() const;
};

// --- export to the generic engine ---

std::string star_hub_winner_id();
std::string star_leaf_winner_id(int j, int k);  // 0-based spoke/leaf
Coalition star_designated_winners(const StarInstance& star);

// Generic instance with 2(1 + total leaves) + J buyers; the hub winner bids
// hub_vickrey() + theta.
AuctionInstance star_to_instance(const StarInstance& star, Money theta);

// --- analytic pricing ---

// Vickrey price of leaf winner (j,k) at hub offset theta: the drop from its
// bid is min(bundle_slack_j + theta, margin_jk).
double star_leaf_vickrey(const StarInstance& star, double theta, int j, int k);

// Response of spoke j's multiplier to a total multiplier s: the unique
// nonnegative l with
//   s + slack_j >= sum_k max(min(slack_j + theta, margin_jk) - l, 0),
// with equality when l > 0; the minimum solution in the degenerate
// s = slack_j = 0 case.
double spoke_multiplier_response(const StarInstance& star, double theta, int j, double s);

struct StarSolution {
  double theta = 0.0;
  double multiplier_sum = 0.0;             // unique fixed point of the responses
  std::vector<double> spoke_multipliers;   // one per spoke
  double hub_price_relaxed = 0.0;          // hub_vickrey + multiplier_sum
  double hub_price = 0.0;                  // min(hub bid, relaxed price)
  std::vector<std::vector<double>> leaf_prices_relaxed;  // [j][k]
};

// Projection of the Vickrey vector onto the expanded core (hub IR dropped),
// in closed form via the multiplier fixed point.
StarSolution solve_star(const StarInstance& star, double theta);

// The expanded core over the designated winners: per-spoke sum rows, leaf
// boxes [losing bid, winning bid], hub bounded below by hub_vickrey() only.
// Independent of the hub offset.
CorePolytope star_expanded_polytope(const StarInstance& star);

// Residuals of the optimality conditions a star solution must satisfy.
struct StarConditionReport {
  double multiplier_nonneg = 0.0;    // max(0, -min multiplier)
  double hub_identity = 0.0;         // |relaxed hub - v0 - sum of multipliers|
  double leaf_identity = 0.0;        // worst leaf price identity residual
  double response_inequality = 0.0;  // worst one-sided response violation
  double response_equality = 0.0;    // worst equality residual on active spokes
  bool below_max_margin = true;      // multiplier_j < max margin_j (strict)
  bool below_slack_plus_theta = true;  // theta>0: slack_j + theta > multiplier_j
  double max_residual() const;
};
StarConditionReport verify_star_solution(const StarInstance& star, const StarSolution& sol);

// Local linear piece of the solution at a non-breakpoint theta.
struct StarLocalModel {
  StarSolution sol;
  double sum_slope = 0.0;           // right slope of the multiplier sum
  std::vector<double> spoke_slope;  // per spoke; 0 on inactive spokes
  std::vector<char> active;         // spokes with positive multiplier
  std::vector<int> in_count;        // |{k : margin_jk > multiplier_j}|, active spokes
  std::vector<int> growing;         // |{k : margin_jk > slack_j + theta}|
};
// Throws BoundaryPointError within kBreakpointTol of any piece change.
StarLocalModel star_local_model(const StarInstance& star, double theta);

// Right derivative of the multiplier sum away from breakpoints:
// (sum over moving spokes of growing/in_count) / (1 + sum of 1/in_count).
double multiplier_sum_right_slope(const StarInstance& star, double theta);

// Hub price under the minimum-revenue-core variant: the hub bid itself while
// it is below the second spoke floor, afterwards the projection price pushed
// up to that floor.
double star_mrc_hub_price(const StarInstance& star, double theta);

}  // namespace csa
