#include <doctest.h>

#include <cmath>
#include <random>

#include "csa/errors.hpp"
#include "csa/mrc.hpp"
#include "csa/projection.hpp"
#include "csa/star.hpp"
#include "oracles.hpp"

using namespace csa;

namespace {

// One spoke, leaf margins (2,1), bundle slack 2: multipliers settle at 1/3.
StarInstance slack_two_star() {
  StarInstance star;
  Spoke sp;
  sp.winning_leaf_bids = {Money::from_value(6), Money::from_value(6)};
  sp.losing_leaf_bids = {Money::from_value(4), Money::from_value(5)};
  sp.bundle_bid = Money::from_value(13);
  star.spokes.push_back(sp);
  star.losing_hub_bid = Money::from_value(3);
  return star;
}

// One spoke, leaf margins (5,1), zero bundle slack: the hand-solved curve
// with pieces 2*theta/3 and (theta+1)/3.
StarInstance zero_slack_star() {
  StarInstance star;
  Spoke sp;
  sp.winning_leaf_bids = {Money::from_value(6), Money::from_value(6)};
  sp.losing_leaf_bids = {Money::from_value(1), Money::from_value(5)};
  sp.bundle_bid = Money::from_value(15);
  star.spokes.push_back(sp);
  star.losing_hub_bid = Money::from_value(3);
  return star;
}

std::map<std::string, double> star_vickrey_reference(const StarInstance& star, double theta) {
  std::map<std::string, double> ref;
  ref[star_hub_winner_id()] = star.hub_vickrey().to_double();
  for (int j = 0; j < star.spoke_count(); ++j)
    for (int k = 0; k < star.leaf_count(j); ++k)
      ref[star_leaf_winner_id(j, k)] = star_leaf_vickrey(star, theta, j, k);
  return ref;
}

}  // namespace

TEST_CASE("derived quantities of the worked one-spoke star") {
  StarInstance star = slack_two_star();
  CHECK(star.hub_vickrey() == Money::from_value(3));  // max(3, 13-12)
  CHECK(star.bundle_slack(0) == doctest::Approx(2.0));
  CHECK(star.margin(0, 0) == doctest::Approx(2.0));
  CHECK(star.margin(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("star invariants are enforced") {
  StarInstance star = slack_two_star();
  SUBCASE("losing bid above winning bid") {
    star.spokes[0].losing_leaf_bids[0] = Money::from_value(7);
    CHECK_THROWS_AS(star.validate(), InvalidInputError);
  }
  SUBCASE("all margins zero") {
    star.spokes[0].losing_leaf_bids = star.spokes[0].winning_leaf_bids;
    CHECK_THROWS_AS(star.validate(), InvalidInputError);
  }
  SUBCASE("mismatched leaf lists") {
    star.spokes[0].losing_leaf_bids.pop_back();
    CHECK_THROWS_AS(star.validate(), InvalidInputError);
  }
  SUBCASE("negative offset") {
    CHECK_THROWS_AS(star_to_instance(star, Money::parse("-1")), InvalidInputError);
    CHECK_THROWS_AS(solve_star(star, -0.5), InvalidInputError);
  }
}

TEST_CASE("export sizes follow 2(1 + leaves) + spokes") {
  StarInstance one_leaf;
  Spoke sp;
  sp.winning_leaf_bids = {Money::from_value(4)};
  sp.losing_leaf_bids = {Money::from_value(1)};
  sp.bundle_bid = Money::from_value(2);
  one_leaf.spokes.push_back(sp);
  one_leaf.losing_hub_bid = Money::from_value(1);
  AuctionInstance inst = star_to_instance(one_leaf, Money::zero());
  CHECK(inst.bids.size() == 5);   // 2*(1+1) + 1
  CHECK(inst.items.size() == 2);

  AuctionInstance two_leaf = star_to_instance(slack_two_star(), Money::zero());
  CHECK(two_leaf.bids.size() == 7);  // 2*(1+2) + 1
  CHECK(two_leaf.items.size() == 3);
}

TEST_CASE("designated winners are efficient from the minimum hub bid upward") {
  for (const StarInstance& star : {slack_two_star(), zero_slack_star()}) {
    Coalition designated = star_designated_winners(star);
    for (const char* offset : {"0", "0.5", "2", "10"}) {
      AuctionInstance inst = star_to_instance(star, Money::parse(offset));
      WdpResult wdp = solve_wdp(inst, TieBreakPolicy::prefer(designated));
      CHECK(wdp.winners == designated);
      CHECK(wdp.welfare == coalition_welfare(inst, designated));
    }
  }
}

TEST_CASE("hub bid below the minimum loses the auction") {
  StarInstance star = slack_two_star();
  AuctionInstance inst = star_to_instance(star, Money::zero());
  inst = inst.with_bid(star_hub_winner_id(), Money::parse("2.9"));  // below v0 = 3
  WdpResult wdp = solve_wdp(inst, TieBreakPolicy::prefer(star_designated_winners(star)));
  CHECK_FALSE(wdp.winners.contains(star_hub_winner_id()));
}

TEST_CASE("leaf vickrey drops are min(slack + offset, margin)") {
  StarInstance star = slack_two_star();
  // At zero offset the drops are min(2,2)=2 and min(2,1)=1: prices (4,5).
  CHECK(star_leaf_vickrey(star, 0.0, 0, 0) == doctest::Approx(4.0));
  CHECK(star_leaf_vickrey(star, 0.0, 0, 1) == doctest::Approx(5.0));
  // Large offset saturates at the losing bids.
  CHECK(star_leaf_vickrey(star, 50.0, 0, 0) == doctest::Approx(4.0));
  CHECK(star_leaf_vickrey(star, 50.0, 0, 1) == doctest::Approx(5.0));

  // Against the generic engine on the exported instance.
  AuctionInstance inst = star_to_instance(star, Money::zero());
  auto prices = vickrey_prices(inst, star_designated_winners(star));
  CHECK(prices.at(star_leaf_winner_id(0, 0)).to_double() == doctest::Approx(4.0));
  CHECK(prices.at(star_leaf_winner_id(0, 1)).to_double() == doctest::Approx(5.0));
  CHECK(prices.at(star_hub_winner_id()) == star.hub_vickrey());
}

TEST_CASE("zero slack and zero offset keep leaf prices at the bids") {
  StarInstance star = zero_slack_star();
  REQUIRE(star.bundle_slack(0) == doctest::Approx(0.0));
  for (int k = 0; k < 2; ++k)
    CHECK(star_leaf_vickrey(star, 0.0, 0, k) ==
          doctest::Approx(star.spokes[0].winning_leaf_bids[k].to_double()));
}

TEST_CASE("multiplier response solves the capped-drop balance") {
  StarInstance star = slack_two_star();  // margins (2,1), slack 2
  double theta = 1.0;
  // With total 0: solve 2 = (2-l) + (1-l)  ->  l = 0.5.
  CHECK(spoke_multiplier_response(star, theta, 0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  // With total 1/3: 7/3 = 3 - 2l  ->  l = 1/3 (the fixed point).
  CHECK(spoke_multiplier_response(star, theta, 0, 1.0 / 3.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Saturated total: response identically zero once s + slack >= total drops.
  CHECK(spoke_multiplier_response(star, theta, 0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("fixed point of the worked star is one third for small offsets") {
  StarInstance star = slack_two_star();
  for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    StarSolution sol = solve_star(star, theta);
    CHECK(sol.multiplier_sum == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    StarConditionReport rep = verify_star_solution(star, sol);
    CHECK(rep.max_residual() <= 1e-10);
    CHECK(rep.below_max_margin);
    CHECK(rep.below_slack_plus_theta);
  }
}

TEST_CASE("zero-slack star follows the two hand-solved pieces") {
  StarInstance star = zero_slack_star();
  for (double theta : {0.1, 0.4, 0.7, 1.0}) {
    CHECK(solve_star(star, theta).multiplier_sum ==
          doctest::Approx(2.0 * theta / 3.0).epsilon(1e-12));
  }
  for (double theta : {1.2, 1.6, 2.0}) {
    CHECK(solve_star(star, theta).multiplier_sum ==
          doctest::Approx((theta + 1.0) / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("saturated responses give the vickrey outcome") {
  // Bundle bid far below the winning total: slack 7 swallows every drop.
  StarInstance star = slack_two_star();
  star.spokes[0].bundle_bid = Money::from_value(8);  // slack = 3 + 12 - 8 = 7
  for (double theta : {0.0, 1.0, 10.0}) {
    StarSolution sol = solve_star(star, theta);
    CHECK(sol.multiplier_sum == doctest::Approx(0.0));
    CHECK(sol.hub_price == doctest::Approx(star.hub_vickrey().to_double()));
    for (int k = 0; k < 2; ++k)
      CHECK(sol.leaf_prices_relaxed[0][k] ==
            doctest::Approx(star_leaf_vickrey(star, theta, 0, k)));
  }
}

TEST_CASE("expanded polytope has one row per spoke and no hub cap") {
  StarInstance star = slack_two_star();
  CorePolytope poly = star_expanded_polytope(star);
  REQUIRE(poly.constraints.size() == 1);
  CHECK(poly.constraints[0].rhs == Money::from_value(13));
  int hub = poly.coord(star_hub_winner_id());
  CHECK_FALSE(poly.upper_bounds[hub].has_value());
  CHECK(poly.lower_bounds[hub] == Money::from_value(3));
  int leaf = poly.coord(star_leaf_winner_id(0, 0));
  CHECK(poly.lower_bounds[leaf] == Money::from_value(4));
  CHECK(poly.upper_bounds[leaf] == Money::from_value(6));
}

TEST_CASE("separation at the vickrey point flags a bundle coalition") {
  StarInstance star = slack_two_star();
  Money theta = Money::from_value(2);
  AuctionInstance inst = star_to_instance(star, theta);
  Coalition winners = star_designated_winners(star);
  // At theta = 2 the drops exhaust both margins, so the vickrey point dips
  // below the spoke's package bid and that coalition must block.
  auto violated =
      find_most_violated_coalition(inst, winners, star_vickrey_reference(star, theta.to_double()));
  REQUIRE(violated.has_value());
  CHECK(violated->first == Coalition::of({"pkg1"}));
}

TEST_CASE("enumerated core of the export matches the spoke rows") {
  StarInstance star = slack_two_star();
  AuctionInstance inst = star_to_instance(star, Money::parse("0.5"));
  Coalition winners = star_designated_winners(star);
  CorePolytope generic = enumerate_core_polytope(inst, winners, 1 << 16);

  // Exactly the spoke sum rows survive pruning.
  REQUIRE(generic.constraints.size() == 1);
  CHECK(generic.constraints[0].rhs == Money::from_value(13));
  std::vector<std::uint8_t> expect(winners.members.size(), 1);
  CHECK(generic.constraints[0].indicator == expect);  // hub + both leaves

  // Leaf boxes carry the losing bids as lower bounds.
  CHECK(generic.lower_bounds[generic.coord(star_leaf_winner_id(0, 0))] == Money::from_value(4));
  CHECK(generic.lower_bounds[generic.coord(star_leaf_winner_id(0, 1))] == Money::from_value(5));
  CHECK(generic.lower_bounds[generic.coord(star_hub_winner_id())] == Money::from_value(3));
}

TEST_CASE("analytic solution equals projection onto the expanded polytope") {
  std::mt19937 rng(91);
  for (int trial = 0; trial < 40; ++trial) {
    StarInstance star = oracle::random_star(rng);
    CorePolytope poly = star_expanded_polytope(star);
    std::uniform_real_distribution<double> theta_dist(0.0, 2.0 * star.max_margin(0) + 1.0);
    for (int rep = 0; rep < 5; ++rep) {
      double theta = theta_dist(rng);
      StarSolution sol = solve_star(star, theta);
      ProjectionResult qp = project_onto_polytope(
          poly, reference_in_order(poly, star_vickrey_reference(star, theta)));

      CHECK(std::abs(qp.prices[poly.coord(star_hub_winner_id())] - sol.hub_price_relaxed) <=
            1e-8);
      for (int j = 0; j < star.spoke_count(); ++j)
        for (int k = 0; k < star.leaf_count(j); ++k)
          CHECK(std::abs(qp.prices[poly.coord(star_leaf_winner_id(j, k))] -
                         sol.leaf_prices_relaxed[j][k]) <= 1e-8);
    }
  }
}

TEST_CASE("full price vector matches the core projection while the hub cap is slack") {
  std::mt19937 rng(96);
  int compared = 0;
  for (int trial = 0; trial < 12 && compared < 24; ++trial) {
    StarInstance star = oracle::random_star(rng, 3, 4, 40.0);
    Coalition winners = star_designated_winners(star);
    double hi = star.max_margin(0) + 2.0;
    for (int g = 1; g <= 4; ++g) {
      Money theta = Money::from_double_rounded(hi * g / 4.0);
      StarSolution sol = solve_star(star, theta.to_double());
      if (sol.multiplier_sum > theta.to_double() - 1e-6) continue;  // hub cap active or tight

      AuctionInstance inst = star_to_instance(star, theta);
      auto reference = to_double_prices(vickrey_prices(inst, winners));
      CoreProjection proj = project_onto_core(inst, winners, reference);
      CHECK(std::abs(proj.result.prices[proj.polytope.coord(star_hub_winner_id())] -
                     sol.hub_price_relaxed) <= 1e-8);
      for (int j = 0; j < star.spoke_count(); ++j)
        for (int k = 0; k < star.leaf_count(j); ++k)
          CHECK(std::abs(proj.result.prices[proj.polytope.coord(star_leaf_winner_id(j, k))] -
                         sol.leaf_prices_relaxed[j][k]) <= 1e-8);
      ++compared;
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("relaxed prices dominate the vickrey reference") {
  std::mt19937 rng(92);
  for (int trial = 0; trial < 60; ++trial) {
    StarInstance star = oracle::random_star(rng);
    std::uniform_real_distribution<double> theta_dist(0.0, 30.0);
    double theta = theta_dist(rng);
    StarSolution sol = solve_star(star, theta);
    CHECK(sol.hub_price_relaxed >= star.hub_vickrey().to_double() - 1e-12);
    for (int j = 0; j < star.spoke_count(); ++j)
      for (int k = 0; k < star.leaf_count(j); ++k)
        CHECK(sol.leaf_prices_relaxed[j][k] >=
              star_leaf_vickrey(star, theta, j, k) - 1e-12);
  }
}

TEST_CASE("right slopes of the worked stars") {
  StarInstance fast = zero_slack_star();  // margins (5,1), slack 0
  CHECK(multiplier_sum_right_slope(fast, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(multiplier_sum_right_slope(fast, 1.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  StarInstance flat = slack_two_star();  // multiplier sum constant at 1/3
  for (double theta : {0.2, 0.5, 0.9})
    CHECK(multiplier_sum_right_slope(flat, theta) == doctest::Approx(0.0));
}

TEST_CASE("slope evaluation at a breakpoint is refused") {
  StarInstance star = zero_slack_star();
  // theta = 1 is the kink between the two hand-solved pieces.
  CHECK_THROWS_AS(multiplier_sum_right_slope(star, 1.0), BoundaryPointError);
}

TEST_CASE("right slope matches forward differences away from kinks") {
  std::mt19937 rng(93);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    StarInstance star = oracle::random_star(rng);
    std::uniform_real_distribution<double> theta_dist(0.0, star.max_margin(0) + 2.0);
    for (int rep = 0; rep < 8; ++rep) {
      double theta = theta_dist(rng);
      double slope;
      try {
        StarLocalModel model = star_local_model(star, theta);
        // Stay on one linear piece across the difference window.
        StarLocalModel ahead = star_local_model(star, theta + 2 * h);
        if (std::abs(ahead.sum_slope - model.sum_slope) > 1e-12) continue;
        slope = model.sum_slope;
      } catch (const BoundaryPointError&) {
        continue;
      }
      double fd = (solve_star(star, theta + h).multiplier_sum -
                   solve_star(star, theta).multiplier_sum) /
                  h;
      CHECK(std::abs(fd - slope) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("single-spoke stars price the hub identically under both rules") {
  StarInstance star = zero_slack_star();
  for (double theta : {0.0, 0.3, 1.0, 1.7, 4.0})
    CHECK(star_mrc_hub_price(star, theta) ==
          doctest::Approx(solve_star(star, theta).hub_price).epsilon(1e-12));
}

TEST_CASE("minimum-revenue hub price tracks the bid below the second floor") {
  // Two spokes with large package bids relative to the losing leaf bids, so
  // both spoke floors clear the minimum hub bid.
  StarInstance star;
  for (int j = 0; j < 2; ++j) {
    Spoke sp;
    sp.winning_leaf_bids = {Money::from_value(10)};
    sp.losing_leaf_bids = {Money::from_value(2)};
    sp.bundle_bid = Money::from_value(11);
    star.spokes.push_back(sp);
  }
  star.losing_hub_bid = Money::from_value(1);
  // v0 = max(1, 11-10) = 1; floors V_j = 11 - 2 = 9 each; second floor 9.
  REQUIRE(star.hub_vickrey() == Money::from_value(1));
  REQUIRE(star.second_spoke_floor() == doctest::Approx(9.0));

  for (double theta : {0.0, 1.0, 4.0, 7.9}) {
    CHECK(star_mrc_hub_price(star, theta) == doctest::Approx(1.0 + theta).epsilon(1e-12));
  }
  // Beyond the floor the price follows max(projection price, floor).
  for (double theta : {8.1, 9.0, 20.0}) {
    StarSolution sol = solve_star(star, theta);
    CHECK(star_mrc_hub_price(star, theta) ==
          doctest::Approx(std::max(sol.hub_price, 9.0)).epsilon(1e-12));
  }
}

TEST_CASE("mrc hub price agrees with the generic selection on random stars") {
  std::mt19937 rng(94);
  int compared = 0;
  for (int trial = 0; trial < 6; ++trial) {
    StarInstance star = oracle::random_star(rng, 3, 3, 30.0);
    Coalition winners = star_designated_winners(star);
    double theta_hi = star.max_margin(0) + 2.0;
    for (int g = 0; g <= 6; ++g) {
      Money theta = Money::from_double_rounded(theta_hi * g / 6.0);
      AuctionInstance inst = star_to_instance(star, theta);
      auto reference = to_double_prices(vickrey_prices(inst, winners));
      MrcResult mrc = mrc_quadratic_price(inst, winners, reference);
      double generic_hub = mrc.prices[mrc.polytope.coord(star_hub_winner_id())];
      CHECK(std::abs(star_mrc_hub_price(star, theta.to_double()) - generic_hub) <= 1e-6);
      ++compared;
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("multiplier sum is nondecreasing along offset grids") {
  std::mt19937 rng(95);
  for (int trial = 0; trial < 25; ++trial) {
    StarInstance star = oracle::random_star(rng);
    double prev = -1.0;
    double hi = star.max_margin(0) + 3.0;
    for (int g = 0; g <= 40; ++g) {
      double sigma = solve_star(star, hi * g / 40.0).multiplier_sum;
      CHECK(sigma >= prev - 1e-10);
      prev = sigma;
    }
  }
}
