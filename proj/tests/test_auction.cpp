#include <doctest.h>

#include <random>

#include "csa/auction.hpp"
#include "csa/errors.hpp"
#include "oracles.hpp"

using namespace csa;

namespace {

// Two small buyers against one package buyer wanting both items.
AuctionInstance two_item_market() {
  AuctionInstance inst;
  inst.items = {"a", "b"};
  inst.bids = {{"s1", Money::from_value(8), {"a"}},
               {"s2", Money::from_value(8), {"b"}},
               {"big", Money::from_value(10), {"a", "b"}}};
  return inst;
}

}  // namespace

TEST_CASE("feasibility is pairwise bundle disjointness") {
  AuctionInstance inst = two_item_market();
  CHECK(is_feasible(inst, Coalition::of({"s1", "s2"})));
  CHECK_FALSE(is_feasible(inst, Coalition::of({"s1", "big"})));
  CHECK(is_feasible(inst, Coalition::of({})));
  CHECK_THROWS_AS(is_feasible(inst, Coalition::of({"ghost"})), InvalidInputError);
}

TEST_CASE("instance invariants are enforced") {
  AuctionInstance inst = two_item_market();
  SUBCASE("duplicate buyer") {
    inst.bids.push_back({"s1", Money::from_value(1), {"a"}});
    CHECK_THROWS_AS(inst.validate(), InvalidInputError);
  }
  SUBCASE("unknown item in bundle") {
    inst.bids.push_back({"s3", Money::from_value(1), {"zz"}});
    CHECK_THROWS_AS(inst.validate(), InvalidInputError);
  }
  SUBCASE("negative amount") {
    inst.bids[0].amount = Money::parse("-1");
    CHECK_THROWS_AS(inst.validate(), InvalidInputError);
  }
  SUBCASE("empty bundle") {
    inst.bids[0].bundle.clear();
    CHECK_THROWS_AS(inst.validate(), InvalidInputError);
  }
}

TEST_CASE("two small buyers beat the package bid") {
  WdpResult wdp = solve_wdp(two_item_market());
  CHECK(wdp.winners == Coalition::of({"s1", "s2"}));
  CHECK(wdp.welfare == Money::from_value(16));
}

TEST_CASE("single bid wins at its own value") {
  AuctionInstance inst;
  inst.items = {"a"};
  inst.bids = {{"only", Money::from_value(5), {"a"}}};
  WdpResult wdp = solve_wdp(inst);
  CHECK(wdp.winners == Coalition::of({"only"}));
  CHECK(wdp.welfare == Money::from_value(5));
}

TEST_CASE("welfare matches exhaustive enumeration on random instances") {
  std::mt19937 rng(20240811);
  for (int trial = 0; trial < 60; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 6, 4);
    WdpResult wdp = solve_wdp(inst);
    CHECK(wdp.welfare == oracle::best_welfare(inst));
    CHECK(is_feasible(inst, wdp.winners));
    CHECK(coalition_welfare(inst, wdp.winners) == wdp.welfare);
  }
}

TEST_CASE("solver dominates every explicitly enumerated coalition") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 10, 5);
    WdpResult wdp = solve_wdp(inst);
    oracle::for_each_feasible(inst, [&](const Coalition& c) {
      CHECK(wdp.welfare >= coalition_welfare(inst, c));
    });
  }
}

TEST_CASE("tie policies are deterministic and honor the designated coalition") {
  AuctionInstance inst;
  inst.items = {"a", "b"};
  inst.bids = {{"p", Money::from_value(6), {"a"}},
               {"q", Money::from_value(6), {"b"}},
               {"r", Money::from_value(12), {"a", "b"}}};  // exact tie 12 = 12

  WdpResult lex1 = solve_wdp(inst);
  WdpResult lex2 = solve_wdp(inst);
  CHECK(lex1.winners == lex2.winners);
  CHECK(lex1.winners == Coalition::of({"p", "q"}));  // "p","q" < "r" lexicographically

  WdpResult pref = solve_wdp(inst, TieBreakPolicy::prefer(Coalition::of({"r"})));
  CHECK(pref.winners == Coalition::of({"r"}));

  CHECK_THROWS_AS(solve_wdp(inst, TieBreakPolicy::prefer(Coalition::of({"p", "r"}))),
                  InvalidInputError);  // infeasible designated coalition
}

TEST_CASE("deleting a dominated losing buyer changes nothing") {
  std::mt19937 rng(99);
  int exercised = 0;
  for (int trial = 0; trial < 40 && exercised < 10; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 7, 4);
    WdpResult before = solve_wdp(inst);
    // Find a loser bidding strictly below every winner's amount.
    Money min_win = before.winners.members.empty() ? Money::zero() : Money::from_value(1000000);
    for (const auto& id : before.winners.members)
      min_win = std::min(min_win, inst.bid_of(id).amount);
    for (std::size_t i = 0; i < inst.bids.size(); ++i) {
      const Bid& b = inst.bids[i];
      if (before.winners.contains(b.buyer) || !(b.amount < min_win)) continue;
      AuctionInstance cut = inst;
      cut.bids.erase(cut.bids.begin() + static_cast<long>(i));
      WdpResult after = solve_wdp(cut);
      CHECK(after.winners == before.winners);
      CHECK(after.welfare == before.welfare);
      ++exercised;
      break;
    }
  }
  CHECK(exercised > 0);
}

TEST_CASE("two small buyers pay their opportunity cost of 2") {
  AuctionInstance inst = two_item_market();
  auto prices = vickrey_prices(inst, Coalition::of({"s1", "s2"}));
  CHECK(prices.at("s1") == Money::from_value(2));
  CHECK(prices.at("s2") == Money::from_value(2));
}

TEST_CASE("uncontested winner pays zero") {
  AuctionInstance inst;
  inst.items = {"a"};
  inst.bids = {{"only", Money::from_value(5), {"a"}}};
  auto prices = vickrey_prices(inst, Coalition::of({"only"}));
  CHECK(prices.at("only") == Money::zero());
}

TEST_CASE("vickrey prices match the per-winner re-solve oracle") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 6, 4);
    WdpResult wdp = solve_wdp(inst);
    auto prices = vickrey_prices(inst, wdp.winners);
    for (const std::string& id : wdp.winners.members) {
      Money expected =
          oracle::best_welfare_without(inst, id) - (wdp.welfare - inst.bid_of(id).amount);
      CHECK(prices.at(id) == expected);
      CHECK(prices.at(id) >= Money::zero());
      CHECK(prices.at(id) <= inst.bid_of(id).amount);
    }
  }
}

TEST_CASE("pricing a non-efficient winner set is rejected") {
  AuctionInstance inst = two_item_market();
  CHECK_THROWS_AS(vickrey_prices(inst, Coalition::of({"big"})), PreconditionError);
}

TEST_CASE("outcomes pair feasible winners with exactly-matching prices") {
  AuctionInstance inst = two_item_market();
  Outcome good{Coalition::of({"s1", "s2"}),
               {{"s1", Money::from_value(5)}, {"s2", Money::from_value(5)}}};
  good.validate(inst);

  Outcome infeasible{Coalition::of({"s1", "big"}), {}};
  CHECK_THROWS_AS(infeasible.validate(inst), InvalidInputError);
  Outcome missing{Coalition::of({"s1", "s2"}), {{"s1", Money::from_value(5)}}};
  CHECK_THROWS_AS(missing.validate(inst), InvalidInputError);
}
