#include "csa/star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csa/errors.hpp"

namespace csa {

namespace {

std::string spoke_tag(int j) { return std::to_string(j + 1); }
std::string leaf_tag(int j, int k) { return spoke_tag(j) + "." + std::to_string(k + 1); }

// Capped price drops of spoke j's leaves at hub offset theta:
// delta_k = min(slack_j + theta, margin_jk).
std::vector<double> capped_drops(const StarInstance& star, double theta, int j) {
  double cap = star.bundle_slack(j) + theta;
  std::vector<double> d(star.leaf_count(j));
  for (int k = 0; k < star.leaf_count(j); ++k) d[k] = std::min(cap, star.margin(j, k));
  return d;
}

double drop_sum_above(const std::vector<double>& drops, double level) {
  double s = 0.0;
  for (double d : drops) s += std::max(d - level, 0.0);
  return s;
}

struct ResponsePiece {
  double value = 0.0;   // the multiplier l
  int count = 0;        // |{k : delta_k > l}|; 0 on the flat branch
  double prefix = 0.0;  // sum of the counted drops
};

ResponsePiece response_piece(const StarInstance& star, double theta, int j, double s) {
  std::vector<double> drops = capped_drops(star, theta, j);
  std::sort(drops.begin(), drops.end(), std::greater<>());
  double t = s + star.bundle_slack(j);
  double total = std::accumulate(drops.begin(), drops.end(), 0.0);
  if (t >= total) return {};

  double prefix = 0.0;
  const int n = static_cast<int>(drops.size());
  for (int m = 1; m <= n; ++m) {
    prefix += drops[m - 1];
    double l = (prefix - t) / m;
    double lower_edge = m < n ? drops[m] : 0.0;
    if (l >= lower_edge - 1e-15 * (1.0 + std::abs(lower_edge)))
      return {std::max(l, 0.0), m, prefix};
  }
  return {std::max((prefix - t) / n, 0.0), n, prefix};  // fp fallback
}

}  // namespace

void StarInstance::validate() const {
  if (spokes.empty()) throw InvalidInputError("star instance needs at least one spoke");
  if (losing_hub_bid < Money::zero()) throw InvalidInputError("negative losing hub bid");
  for (int j = 0; j < spoke_count(); ++j) {
    const Spoke& sp = spokes[j];
    if (sp.winning_leaf_bids.empty())
      throw InvalidInputError("spoke " + spoke_tag(j) + " has no leaf items");
    if (sp.winning_leaf_bids.size() != sp.losing_leaf_bids.size())
      throw InvalidInputError("spoke " + spoke_tag(j) + " leaf bid lists differ in length");
    if (sp.bundle_bid < Money::zero())
      throw InvalidInputError("negative bundle bid on spoke " + spoke_tag(j));
    bool positive_margin = false;
    for (std::size_t k = 0; k < sp.winning_leaf_bids.size(); ++k) {
      if (sp.losing_leaf_bids[k] < Money::zero())
        throw InvalidInputError("negative losing bid on leaf " + leaf_tag(j, (int)k));
      if (sp.winning_leaf_bids[k] < sp.losing_leaf_bids[k])
        throw InvalidInputError("leaf " + leaf_tag(j, (int)k) +
                                " losing bid exceeds the winning bid");
      if (sp.winning_leaf_bids[k] > sp.losing_leaf_bids[k]) positive_margin = true;
    }
    if (!positive_margin)
      throw InvalidInputError("spoke " + spoke_tag(j) + " has no positive leaf margin");
  }
}

double StarInstance::margin(int j, int k) const {
  return (spokes[j].winning_leaf_bids[k] - spokes[j].losing_leaf_bids[k]).to_double();
}

double StarInstance::max_margin(int j) const {
  double m = 0.0;
  for (int k = 0; k < leaf_count(j); ++k) m = std::max(m, margin(j, k));
  return m;
}

Money StarInstance::hub_vickrey() const {
  Money v = losing_hub_bid;
  for (const Spoke& sp : spokes) {
    Money leaves;
    for (Money b : sp.winning_leaf_bids) leaves += b;
    v = std::max(v, sp.bundle_bid - leaves);
  }
  return v;
}

double StarInstance::bundle_slack(int j) const {
  Money leaves;
  for (Money b : spokes[j].winning_leaf_bids) leaves += b;
  return (hub_vickrey() + leaves - spokes[j].bundle_bid).to_double();
}

double StarInstance::spoke_floor(int j) const {
  Money losing;
  for (Money b : spokes[j].losing_leaf_bids) losing += b;
  return std::max((spokes[j].bundle_bid - losing).to_double(), 0.0);
}

double StarInstance::second_spoke_floor() const {
  if (spoke_count() < 2) return -std::numeric_limits<double>::infinity();
  std::vector<double> floors(spoke_count());
  for (int j = 0; j < spoke_count(); ++j) floors[j] = spoke_floor(j);
  std::sort(floors.begin(), floors.end(), std::greater<>());
  return floors[1];
}

std::string star_hub_winner_id() { return "w0"; }

std::string star_leaf_winner_id(int j, int k) { return "w" + spoke_tag(j) + "_" + std::to_string(k + 1); }

Coalition star_designated_winners(const StarInstance& star) {
  std::vector<std::string> ids{star_hub_winner_id()};
  for (int j = 0; j < star.spoke_count(); ++j)
    for (int k = 0; k < star.leaf_count(j); ++k) ids.push_back(star_leaf_winner_id(j, k));
  return Coalition::of(std::move(ids));
}

AuctionInstance star_to_instance(const StarInstance& star, Money theta) {
  star.validate();
  if (theta < Money::zero()) throw InvalidInputError("hub offset must be nonnegative");

  AuctionInstance inst;
  inst.items.push_back("0");
  inst.bids.push_back({star_hub_winner_id(), star.hub_vickrey() + theta, {"0"}});
  inst.bids.push_back({"l0", star.losing_hub_bid, {"0"}});
  for (int j = 0; j < star.spoke_count(); ++j) {
    std::vector<std::string> bundle_items{"0"};
    for (int k = 0; k < star.leaf_count(j); ++k) {
      std::string item = leaf_tag(j, k);
      inst.items.push_back(item);
      bundle_items.push_back(item);
      inst.bids.push_back({star_leaf_winner_id(j, k), star.spokes[j].winning_leaf_bids[k], {item}});
      inst.bids.push_back({"l" + spoke_tag(j) + "_" + std::to_string(k + 1),
                           star.spokes[j].losing_leaf_bids[k],
                           {item}});
    }
    std::sort(bundle_items.begin(), bundle_items.end());
    inst.bids.push_back({"pkg" + spoke_tag(j), star.spokes[j].bundle_bid, bundle_items});
  }
  std::sort(inst.items.begin(), inst.items.end());
  inst.validate();
  return inst;
}

double star_leaf_vickrey(const StarInstance& star, double theta, int j, int k) {
  double drop = std::min(star.bundle_slack(j) + theta, star.margin(j, k));
  return star.spokes[j].winning_leaf_bids[k].to_double() - drop;
}

double spoke_multiplier_response(const StarInstance& star, double theta, int j, double s) {
  if (s < 0 || theta < 0)
    throw InvalidInputError("multiplier response needs nonnegative arguments");
  return response_piece(star, theta, j, s).value;
}

StarSolution solve_star(const StarInstance& star, double theta) {
  star.validate();
  if (theta < 0) throw InvalidInputError("hub offset must be nonnegative");
  const int J = star.spoke_count();

  double upper = 0.0;
  for (int j = 0; j < J; ++j)
    upper += std::min(star.bundle_slack(j) + theta, star.max_margin(j));

  auto response_sum = [&](double s) {
    double sum = 0.0;
    for (int j = 0; j < J; ++j) sum += response_piece(star, theta, j, s).value;
    return sum;
  };

  // The residual s - sum_of_responses(s) is strictly increasing, negative at
  // 0 (or zero) and nonnegative at the upper cap: bisect, then snap onto the
  // active linear piece for an exact fixed point.
  double lo = 0.0, hi = upper;
  for (int it = 0; it < 80 && hi - lo > 0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid - response_sum(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  double sigma = 0.5 * (lo + hi);

  double numer = 0.0, denom = 1.0;
  for (int j = 0; j < J; ++j) {
    ResponsePiece rp = response_piece(star, theta, j, sigma);
    if (rp.count > 0) {
      numer += (rp.prefix - star.bundle_slack(j)) / rp.count;
      denom += 1.0 / rp.count;
    }
  }
  double snapped = std::max(numer / denom, 0.0);
  if (std::abs(snapped - response_sum(snapped)) <= 1e-9 * (1.0 + snapped)) sigma = snapped;

  StarSolution sol;
  sol.theta = theta;
  sol.spoke_multipliers.resize(J);
  sol.leaf_prices_relaxed.resize(J);
  double v0 = star.hub_vickrey().to_double();
  for (int j = 0; j < J; ++j) {
    double lambda = response_piece(star, theta, j, sigma).value;
    sol.spoke_multipliers[j] = lambda;
    sol.leaf_prices_relaxed[j].resize(star.leaf_count(j));
    for (int k = 0; k < star.leaf_count(j); ++k) {
      double bid = star.spokes[j].winning_leaf_bids[k].to_double();
      sol.leaf_prices_relaxed[j][k] =
          std::min(star_leaf_vickrey(star, theta, j, k) + lambda, bid);
    }
  }
  sol.multiplier_sum = sigma;
  sol.hub_price_relaxed = v0 + sigma;
  sol.hub_price = std::min(v0 + theta, sol.hub_price_relaxed);
  return sol;
}

CorePolytope star_expanded_polytope(const StarInstance& star) {
  star.validate();
  CorePolytope poly;
  Coalition winners = star_designated_winners(star);
  poly.winners = winners.members;
  const int n = static_cast<int>(poly.winners.size());
  poly.lower_bounds.assign(n, Money::zero());
  poly.upper_bounds.assign(n, std::nullopt);
  poly.feasible_point.assign(n, 0.0);

  Money v0 = star.hub_vickrey();
  int hub = poly.coord(star_hub_winner_id());
  poly.lower_bounds[hub] = v0;
  poly.feasible_point[hub] = v0.to_double();

  for (int j = 0; j < star.spoke_count(); ++j) {
    CoreConstraint row;
    row.coalition = Coalition::of({"pkg" + spoke_tag(j)});
    row.indicator.assign(n, 0);
    row.indicator[hub] = 1;
    for (int k = 0; k < star.leaf_count(j); ++k) {
      int c = poly.coord(star_leaf_winner_id(j, k));
      row.indicator[c] = 1;
      poly.lower_bounds[c] = star.spokes[j].losing_leaf_bids[k];
      poly.upper_bounds[c] = star.spokes[j].winning_leaf_bids[k];
      poly.feasible_point[c] = star.spokes[j].winning_leaf_bids[k].to_double();
    }
    row.rhs = star.spokes[j].bundle_bid;
    poly.constraints.push_back(std::move(row));
  }
  return poly;
}

double StarConditionReport::max_residual() const {
  return std::max({multiplier_nonneg, hub_identity, leaf_identity, response_inequality,
                   response_equality});
}

StarConditionReport verify_star_solution(const StarInstance& star, const StarSolution& sol) {
  StarConditionReport rep;
  double v0 = star.hub_vickrey().to_double();
  double sum = 0.0;
  for (int j = 0; j < star.spoke_count(); ++j) {
    double lambda = sol.spoke_multipliers[j];
    sum += lambda;
    rep.multiplier_nonneg = std::max(rep.multiplier_nonneg, -lambda);
    if (!(lambda < star.max_margin(j))) rep.below_max_margin = false;
    if (sol.theta > 0 && !(star.bundle_slack(j) + sol.theta > lambda))
      rep.below_slack_plus_theta = false;

    std::vector<double> drops = capped_drops(star, sol.theta, j);
    double chi = drop_sum_above(drops, lambda);
    double lhs = sol.multiplier_sum + star.bundle_slack(j);
    rep.response_inequality = std::max(rep.response_inequality, chi - lhs);
    if (lambda > 1e-12) rep.response_equality = std::max(rep.response_equality, std::abs(chi - lhs));

    for (int k = 0; k < star.leaf_count(j); ++k) {
      double bid = star.spokes[j].winning_leaf_bids[k].to_double();
      double expected = std::min(star_leaf_vickrey(star, sol.theta, j, k) + lambda, bid);
      rep.leaf_identity =
          std::max(rep.leaf_identity, std::abs(sol.leaf_prices_relaxed[j][k] - expected));
    }
  }
  rep.hub_identity = std::abs(sol.hub_price_relaxed - v0 - sum);
  return rep;
}

StarLocalModel star_local_model(const StarInstance& star, double theta) {
  StarLocalModel model;
  model.sol = solve_star(star, theta);
  const int J = star.spoke_count();
  model.spoke_slope.assign(J, 0.0);
  model.active.assign(J, 0);
  model.in_count.assign(J, 0);
  model.growing.assign(J, 0);

  double sigma = model.sol.multiplier_sum;
  for (int j = 0; j < J; ++j) {
    double cap = star.bundle_slack(j) + theta;
    for (int k = 0; k < star.leaf_count(j); ++k) {
      if (std::abs(cap - star.margin(j, k)) < kBreakpointTol)
        throw BoundaryPointError("saturation crossing near the query offset");
      if (star.margin(j, k) > cap) ++model.growing[j];
    }

    ResponsePiece rp = response_piece(star, theta, j, sigma);
    if (rp.count > 0) {
      double lambda = model.sol.spoke_multipliers[j];
      if (lambda < kBreakpointTol)
        throw BoundaryPointError("spoke multiplier at the activation edge");
      std::vector<double> drops = capped_drops(star, theta, j);
      for (double d : drops)
        if (std::abs(lambda - d) < kBreakpointTol)
          throw BoundaryPointError("spoke multiplier sits on a drop level");
      model.active[j] = 1;
      model.in_count[j] = rp.count;
    } else {
      std::vector<double> drops = capped_drops(star, theta, j);
      double gap = (sigma + star.bundle_slack(j)) - drop_sum_above(drops, 0.0);
      if (gap < kBreakpointTol)
        throw BoundaryPointError("inactive spoke on the verge of activating");
    }
  }

  double numer = 0.0, denom = 1.0;
  for (int j = 0; j < J; ++j) {
    if (!model.active[j]) continue;
    numer += static_cast<double>(model.growing[j]) / model.in_count[j];
    denom += 1.0 / model.in_count[j];
  }
  model.sum_slope = numer / denom;
  for (int j = 0; j < J; ++j)
    if (model.active[j])
      model.spoke_slope[j] = (model.growing[j] - model.sum_slope) / model.in_count[j];
  return model;
}

double multiplier_sum_right_slope(const StarInstance& star, double theta) {
  StarLocalModel model = star_local_model(star, theta);
  // Restrict to the spokes whose multipliers actually move; the value is
  // unchanged, matching the closed form stated over that set.
  double numer = 0.0, denom = 1.0;
  for (int j = 0; j < star.spoke_count(); ++j) {
    if (!model.active[j] || std::abs(model.spoke_slope[j]) <= 1e-12) continue;
    numer += static_cast<double>(model.growing[j]) / model.in_count[j];
    denom += 1.0 / model.in_count[j];
  }
  return numer / denom;
}

double star_mrc_hub_price(const StarInstance& star, double theta) {
  StarSolution sol = solve_star(star, theta);
  if (star.spoke_count() == 1) return sol.hub_price;
  double second_floor = star.second_spoke_floor();
  double hub_bid = star.hub_vickrey().to_double() + theta;
  if (hub_bid <= second_floor) return hub_bid;
  return std::max(sol.hub_price, second_floor);
}

}  // namespace csa
