#include "csa/auction.hpp"

#include <algorithm>
#include <set>

#include "csa/detail/coalition_search.hpp"
#include "csa/errors.hpp"

namespace csa {

void AuctionInstance::validate() const {
  std::set<std::string> item_set(items.begin(), items.end());
  if (item_set.size() != items.size()) throw InvalidInputError("duplicate item ids");
  std::set<std::string> buyer_set;
  for (const Bid& b : bids) {
    if (!buyer_set.insert(b.buyer).second)
      throw InvalidInputError("duplicate buyer id '" + b.buyer + "'");
    if (b.amount < Money::zero())
      throw InvalidInputError("negative bid amount for buyer '" + b.buyer + "'");
    if (b.bundle.empty()) throw InvalidInputError("empty bundle for buyer '" + b.buyer + "'");
    std::set<std::string> bundle_set(b.bundle.begin(), b.bundle.end());
    if (bundle_set.size() != b.bundle.size())
      throw InvalidInputError("duplicate items in bundle of buyer '" + b.buyer + "'");
    for (const std::string& it : b.bundle)
      if (!item_set.count(it))
        throw InvalidInputError("buyer '" + b.buyer + "' bids on unknown item '" + it + "'");
  }
}

int AuctionInstance::buyer_index(const std::string& buyer) const {
  for (std::size_t i = 0; i < bids.size(); ++i)
    if (bids[i].buyer == buyer) return static_cast<int>(i);
  return -1;
}

const Bid& AuctionInstance::bid_of(const std::string& buyer) const {
  int i = buyer_index(buyer);
  if (i < 0) throw InvalidInputError("unknown buyer '" + buyer + "'");
  return bids[i];
}

int AuctionInstance::item_index(const std::string& item) const {
  auto it = std::find(items.begin(), items.end(), item);
  return it == items.end() ? -1 : static_cast<int>(it - items.begin());
}

AuctionInstance AuctionInstance::with_bid(const std::string& buyer, Money amount) const {
  AuctionInstance copy = *this;
  int i = copy.buyer_index(buyer);
  if (i < 0) throw InvalidInputError("unknown buyer '" + buyer + "'");
  copy.bids[i].amount = amount;
  return copy;
}

void Outcome::validate(const AuctionInstance& instance) const {
  if (!is_feasible(instance, winners)) throw InvalidInputError("outcome winners are not feasible");
  if (prices.size() != winners.members.size())
    throw InvalidInputError("outcome prices must be defined exactly on the winners");
  for (const std::string& id : winners.members)
    if (!prices.count(id)) throw InvalidInputError("missing outcome price for '" + id + "'");
}

Coalition Coalition::of(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return Coalition{std::move(ids)};
}

bool Coalition::contains(const std::string& buyer) const {
  return std::binary_search(members.begin(), members.end(), buyer);
}

bool is_feasible(const AuctionInstance& instance, const Coalition& coalition) {
  std::set<std::string> used;
  for (const std::string& id : coalition.members) {
    const Bid& bid = instance.bid_of(id);  // throws on unknown buyer
    for (const std::string& item : bid.bundle)
      if (!used.insert(item).second) return false;
  }
  return true;
}

Money coalition_welfare(const AuctionInstance& instance, const Coalition& coalition) {
  Money total;
  for (const std::string& id : coalition.members) total += instance.bid_of(id).amount;
  return total;
}

namespace {

std::vector<std::vector<int>> bundle_indices(const AuctionInstance& instance) {
  std::vector<std::vector<int>> out(instance.bids.size());
  for (std::size_t i = 0; i < instance.bids.size(); ++i) {
    for (const std::string& item : instance.bids[i].bundle)
      out[i].push_back(instance.item_index(item));
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

std::vector<std::string> index_set_to_ids(const AuctionInstance& instance,
                                          const std::vector<int>& idx) {
  std::vector<std::string> ids;
  ids.reserve(idx.size());
  for (int i : idx) ids.push_back(instance.bids[i].buyer);
  std::sort(ids.begin(), ids.end());
  return ids;
}

WdpResult solve_wdp_impl(const AuctionInstance& instance, const TieBreakPolicy& tie,
                         int excluded_buyer, const Coalition* incumbent = nullptr) {
  instance.validate();
  std::vector<std::int64_t> values;
  values.reserve(instance.bids.size());
  for (const Bid& b : instance.bids) values.push_back(b.amount.units());

  detail::CoalitionSearch<std::int64_t> search(bundle_indices(instance), std::move(values),
                                               static_cast<int>(instance.items.size()));
  if (excluded_buyer >= 0) search.exclude(excluded_buyer);
  if (incumbent) {
    std::vector<int> idx;
    std::int64_t value = 0;
    for (const std::string& id : incumbent->members) {
      int i = instance.buyer_index(id);
      idx.push_back(i);
      value += instance.bids[i].amount.units();
    }
    search.set_incumbent(std::move(idx), value);
  }

  std::vector<int> designated_idx;
  if (tie.mode == TieBreakPolicy::Mode::PreferDesignated) {
    if (!is_feasible(instance, tie.designated))
      throw InvalidInputError("designated tie-break coalition is not feasible");
    for (const std::string& id : tie.designated.members)
      designated_idx.push_back(instance.buyer_index(id));
    std::sort(designated_idx.begin(), designated_idx.end());
  }

  search.set_preference([&](const std::vector<int>& a, const std::vector<int>& b) {
    if (tie.mode == TieBreakPolicy::Mode::PreferDesignated) {
      if (a == designated_idx) return true;
      if (b == designated_idx) return false;
    }
    return index_set_to_ids(instance, a) < index_set_to_ids(instance, b);
  });

  auto result = search.run();
  return {Coalition::of(index_set_to_ids(instance, result.members)),
          Money::from_units(result.value)};
}

}  // namespace

WdpResult solve_wdp(const AuctionInstance& instance, const TieBreakPolicy& tie) {
  return solve_wdp_impl(instance, tie, -1);
}

Money max_welfare_without(const AuctionInstance& instance, const std::string& buyer) {
  int idx = instance.buyer_index(buyer);
  if (idx < 0) throw InvalidInputError("unknown buyer '" + buyer + "'");
  return solve_wdp_impl(instance, TieBreakPolicy::lexicographic(), idx).welfare;
}

std::map<std::string, Money> vickrey_prices(const AuctionInstance& instance,
                                            const Coalition& winners) {
  Money optimal = solve_wdp(instance).welfare;
  Money winner_welfare = coalition_welfare(instance, winners);
  if (!is_feasible(instance, winners) || winner_welfare != optimal)
    throw PreconditionError("winner set is not an efficient allocation");

  std::map<std::string, Money> prices;
  for (const std::string& id : winners.members) {
    // The other winners stay feasible without this buyer; priming the search
    // with them prunes the per-winner re-solve almost immediately.
    Coalition others_coalition{winners.members};
    std::erase(others_coalition.members, id);
    Money without = solve_wdp_impl(instance, TieBreakPolicy::lexicographic(),
                                   instance.buyer_index(id), &others_coalition)
                        .welfare;
    Money others = winner_welfare - instance.bid_of(id).amount;
    prices[id] = without - others;
  }
  return prices;
}

}  // namespace csa
