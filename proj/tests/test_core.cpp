#include <doctest.h>

#include <random>

#include "csa/core_polytope.hpp"
#include "csa/errors.hpp"
#include "oracles.hpp"

using namespace csa;

namespace {

AuctionInstance two_item_market() {
  AuctionInstance inst;
  inst.items = {"a", "b"};
  inst.bids = {{"s1", Money::from_value(8), {"a"}},
               {"s2", Money::from_value(8), {"b"}},
               {"big", Money::from_value(10), {"a", "b"}}};
  return inst;
}

std::map<std::string, double> prices_of(std::initializer_list<std::pair<std::string, double>> kv) {
  return {kv.begin(), kv.end()};
}

}  // namespace

TEST_CASE("vickrey point is blocked by the package buyer") {
  AuctionInstance inst = two_item_market();
  Coalition winners = Coalition::of({"s1", "s2"});
  CoreMembership m = is_in_core(inst, winners, prices_of({{"s1", 2.0}, {"s2", 2.0}}));
  CHECK_FALSE(m.in_core);
  REQUIRE_FALSE(m.violated.empty());
  CHECK(m.violated.front().first == Coalition::of({"big"}));
  CHECK(m.violated.front().second == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("bid vector itself is always in the core") {
  AuctionInstance inst = two_item_market();
  Coalition winners = Coalition::of({"s1", "s2"});
  CHECK(is_in_core(inst, winners, prices_of({{"s1", 8.0}, {"s2", 8.0}})).in_core);
}

TEST_CASE("prices outside the IR box are rejected") {
  AuctionInstance inst = two_item_market();
  Coalition winners = Coalition::of({"s1", "s2"});
  CHECK_THROWS_AS(is_in_core(inst, winners, prices_of({{"s1", 9.0}, {"s2", 2.0}})),
                  InvalidInputError);
  CHECK_THROWS_AS(is_in_core(inst, winners, prices_of({{"s1", -1.0}, {"s2", 2.0}})),
                  InvalidInputError);
  CHECK_THROWS_AS(is_in_core(inst, winners, prices_of({{"s1", 2.0}})), InvalidInputError);
}

TEST_CASE("membership agrees with exhaustive enumeration on random instances") {
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  int blocked = 0, clean = 0;
  for (int trial = 0; trial < 80; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 8, 5);
    WdpResult wdp = solve_wdp(inst);
    std::map<std::string, double> prices;
    for (const std::string& id : wdp.winners.members)
      prices[id] = inst.bid_of(id).amount.to_double() * frac(rng);
    bool mine = is_in_core(inst, wdp.winners, prices).in_core;
    bool oracle_says = oracle::in_core(inst, wdp.winners, prices);
    CHECK(mine == oracle_says);
    (mine ? clean : blocked)++;
  }
  CHECK(blocked > 0);  // the sample hit both classes
  CHECK(clean > 0);
}

TEST_CASE("separation returns the most violated coalition") {
  AuctionInstance inst = two_item_market();
  Coalition winners = Coalition::of({"s1", "s2"});
  auto worst = find_most_violated_coalition(inst, winners, prices_of({{"s1", 2.0}, {"s2", 2.0}}));
  REQUIRE(worst.has_value());
  CHECK(worst->first == Coalition::of({"big"}));
  CHECK(worst->second == doctest::Approx(6.0).epsilon(1e-12));

  CHECK_FALSE(
      find_most_violated_coalition(inst, winners, prices_of({{"s1", 8.0}, {"s2", 8.0}})).has_value());
}

TEST_CASE("separation emptiness coincides with core membership") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 9, 5);
    WdpResult wdp = solve_wdp(inst);
    std::map<std::string, double> prices;
    for (const std::string& id : wdp.winners.members)
      prices[id] = inst.bid_of(id).amount.to_double() * frac(rng);
    auto sep = find_most_violated_coalition(inst, wdp.winners, prices);
    CHECK(sep.has_value() == !is_in_core(inst, wdp.winners, prices).in_core);
    if (sep) {
      auto worst = oracle::most_violated(inst, wdp.winners, prices);
      REQUIRE(worst.has_value());
      CHECK(sep->second == doctest::Approx(worst->second).epsilon(1e-9));
    }
  }
}

TEST_CASE("two-item market enumerates to one row plus box bounds") {
  AuctionInstance inst = two_item_market();
  Coalition winners = Coalition::of({"s1", "s2"});
  CorePolytope poly = enumerate_core_polytope(inst, winners, 1 << 12);
  REQUIRE(poly.constraints.size() == 1);
  CHECK(poly.constraints[0].rhs == Money::from_value(10));
  CHECK(poly.constraints[0].indicator == std::vector<std::uint8_t>{1, 1});
  CHECK(poly.lower_bounds[0] == Money::zero());  // nonnegativity rows folded away
  CHECK(poly.upper_bounds[0] == Money::from_value(8));
}

TEST_CASE("no losing buyers leaves only the box") {
  AuctionInstance inst;
  inst.items = {"a", "b"};
  inst.bids = {{"p", Money::from_value(3), {"a"}}, {"q", Money::from_value(4), {"b"}}};
  CorePolytope poly = enumerate_core_polytope(inst, Coalition::of({"p", "q"}), 1 << 12);
  CHECK(poly.constraints.empty());
  CHECK(poly.lower_bounds[0] == Money::zero());
  CHECK(poly.lower_bounds[1] == Money::zero());
}

TEST_CASE("coalition cap raises a resource error") {
  std::mt19937 rng(1);
  AuctionInstance inst = oracle::random_instance(rng, 10, 6);
  Coalition winners = solve_wdp(inst).winners;
  CHECK_THROWS_AS(enumerate_core_polytope(inst, winners, 4), ResourceLimitError);
}

TEST_CASE("dominance pruning preserves the feasible region") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    AuctionInstance inst = oracle::random_instance(rng, 8, 4);
    WdpResult wdp = solve_wdp(inst);
    CorePolytope pruned = enumerate_core_polytope(inst, wdp.winners, 1 << 16);

    // The winners' own bids satisfy every generated constraint.
    std::vector<double> bid_point;
    for (const std::string& id : wdp.winners.members)
      bid_point.push_back(inst.bid_of(id).amount.to_double());
    CHECK(pruned.max_violation(bid_point) <= kViolationTol);

    for (int probe = 0; probe < 40; ++probe) {
      std::map<std::string, double> prices;
      std::vector<double> ordered;
      for (const std::string& id : wdp.winners.members) {
        double p = inst.bid_of(id).amount.to_double() * frac(rng);
        prices[id] = p;
        ordered.push_back(p);
      }
      bool in_pruned = pruned.max_violation(ordered) <= kViolationTol;
      CHECK(in_pruned == oracle::in_core(inst, wdp.winners, prices));
    }
  }
}
