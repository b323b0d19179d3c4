#pragma once

#include <string>
#include <vector>

#include "csa/auction.hpp"
#include "csa/star.hpp"

namespace csa {

// Slack over slope 1 before a segment counts as a bound violation.
inline constexpr double kMidSlopeTol = 1e-8;

enum class PaymentRule { Vickrey, QuadraticCore, MrcQuadratic };

std::string payment_rule_name(PaymentRule rule);
PaymentRule parse_payment_rule(const std::string& name);

// Piecewise-linear price-versus-bid-offset curve.
struct PriceCurve {
  std::vector<std::pair<double, double>> points;  // (theta, price), theta increasing

  std::vector<double> slopes() const;  // one per segment
  double value_at(double theta) const;
  double theta_min() const { return points.front().first; }
  double theta_max() const { return points.back().first; }
};

struct MidSegment {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double slope = 0.0;
};

// Marginal incentive to deviate: the worst per-unit price increase over the
// swept bid range.
struct MidReport {
  double max_slope = 0.0;
  double arg_theta = 0.0;  // left end of the steepest segment
  PaymentRule rule = PaymentRule::QuadraticCore;
  std::vector<MidSegment> violations;  // segments steeper than 1 + kMidSlopeTol
};

MidReport compute_mid(const PriceCurve& curve, PaymentRule rule = PaymentRule::QuadraticCore);

// Exact hub-price curve over [0, theta_max] from the analytic star solver;
// every breakpoint is a real kink of the underlying piecewise-linear price.
PriceCurve sweep_star_curve(const StarInstance& star, double theta_max, PaymentRule rule);

// The unclamped curve v0 + multiplier_sum(theta); its breakpoints are the
// kinks of the multiplier sum itself.
PriceCurve sweep_star_relaxed_curve(const StarInstance& star, double theta_max);

struct GenericSweepOptions {
  Money step;  // zero -> range / 200
  TieBreakPolicy tie = TieBreakPolicy::lexicographic();
  PaymentRule rule = PaymentRule::QuadraticCore;
  int jobs = 1;  // parallel grid evaluations
};

// Sampled price curve for one buyer's bid swept over [bid_lo, bid_hi] with
// all other bids fixed. Slope changes are localized by adaptive refinement
// down to 1e-6 of the range. Throws RangeInvalidError (with the crossing
// bid) if the winner set changes inside the range.
PriceCurve sweep_generic_curve(const AuctionInstance& instance, const std::string& buyer,
                               Money bid_lo, Money bid_hi, const GenericSweepOptions& options);

// Two-scenario market used by the worst-case lower bound: w single-item
// winners against one all-items package bid, with the deviating buyer's bid
// raised by w * delta between the scenarios.
struct LowerBoundScenario {
  int winner_count = 0;  // w
  Money delta;
  AuctionInstance scenario_one;  // deviator bids 1 - (w-1) delta, exact tie
  AuctionInstance scenario_two;  // deviator bids 1 + delta
  std::string deviating_buyer;
  TieBreakPolicy tie;  // ties resolved in favor of the single-item buyers
};

// Requires w >= 2 and 0 < delta <= 1/(w-1) (checked exactly on the money grid).
LowerBoundScenario generate_lower_bound_scenario(int w, Money delta);

struct LowerBoundReport {
  double price_before = 0.0;
  double price_after = 0.0;
  double price_increase = 0.0;
  double bid_increase = 0.0;
  double ratio = 0.0;
  bool scenario_one_prices_exact = false;  // prices equal bids on the money grid
};

// Runs both scenarios under the given rule and reports the realized
// price-increase to bid-increase ratio (at least 1 - 1/w).
LowerBoundReport verify_lower_bound(const LowerBoundScenario& scenario, PaymentRule rule);

}  // namespace csa
