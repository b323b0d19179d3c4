#pragma once

#include <map>
#include <string>
#include <vector>

#include "csa/money.hpp"

namespace csa {

// Single-parameter bid: one amount for one fixed bundle of items.
struct Bid {
  std::string buyer;
  Money amount;
  std::vector<std::string> bundle;  // sorted, unique item ids
};

struct AuctionInstance {
  std::vector<std::string> items;  // sorted, unique
  std::vector<Bid> bids;

  // Checks all type invariants (unique ids, bundles within items, amounts
  // nonnegative, bundles nonempty). Throws InvalidInputError on violation.
  void validate() const;

  int buyer_index(const std::string& buyer) const;  // -1 if unknown
  const Bid& bid_of(const std::string& buyer) const;
  int item_index(const std::string& item) const;  // -1 if unknown

  // Copy of this instance with one buyer's bid amount replaced.
  AuctionInstance with_bid(const std::string& buyer, Money amount) const;
};

// Set of buyers, kept sorted for deterministic comparisons.
struct Coalition {
  std::vector<std::string> members;

  static Coalition of(std::vector<std::string> ids);
  bool contains(const std::string& buyer) const;
  bool operator==(const Coalition&) const = default;
};

struct Outcome {
  Coalition winners;
  std::map<std::string, Money> prices;  // defined exactly on winners

  // Winners feasible, prices keyed exactly by the winner set.
  void validate(const AuctionInstance& instance) const;
};

struct TieBreakPolicy {
  enum class Mode { Lexicographic, PreferDesignated };
  Mode mode = Mode::Lexicographic;
  Coalition designated;  // used only in PreferDesignated mode

  static TieBreakPolicy lexicographic() { return {}; }
  static TieBreakPolicy prefer(Coalition c) {
    return {Mode::PreferDesignated, std::move(c)};
  }
};

struct WdpResult {
  Coalition winners;
  Money welfare;
};

// True iff the members' bundles are pairwise disjoint.
// Throws InvalidInputError if a member is unknown.
bool is_feasible(const AuctionInstance& instance, const Coalition& coalition);

Money coalition_welfare(const AuctionInstance& instance, const Coalition& coalition);

// Efficient winner determination: maximizes total bid value over feasible
// coalitions; ties resolved deterministically by the given policy.
WdpResult solve_wdp(const AuctionInstance& instance,
                    const TieBreakPolicy& tie = TieBreakPolicy::lexicographic());

// Optimal welfare achievable without the given buyer participating.
Money max_welfare_without(const AuctionInstance& instance, const std::string& buyer);

// Opportunity-cost prices for an efficient winner set: each winner pays the
// welfare the rest of the market loses by its presence.
// Throws PreconditionError if `winners` is not welfare-maximal.
std::map<std::string, Money> vickrey_prices(const AuctionInstance& instance,
                                            const Coalition& winners);

}  // namespace csa
