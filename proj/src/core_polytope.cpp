#include "csa/core_polytope.hpp"

#include <algorithm>
#include <functional>

#include "csa/detail/coalition_search.hpp"
#include "csa/errors.hpp"

namespace csa {

namespace {

// Exhaustive feasible-coalition count is only attempted below this size.
constexpr std::size_t kExhaustiveBuyerCap = 20;

void check_ir_bounds(const AuctionInstance& instance, const Coalition& winners,
                     const std::map<std::string, double>& prices) {
  for (const std::string& id : winners.members) {
    auto it = prices.find(id);
    if (it == prices.end()) throw InvalidInputError("missing price for winner '" + id + "'");
    double b = instance.bid_of(id).amount.to_double();
    if (it->second < -kViolationTol || it->second > b + kViolationTol)
      throw InvalidInputError("price for winner '" + id + "' outside [0, bid]");
  }
  if (prices.size() != winners.members.size())
    throw InvalidInputError("prices must be defined exactly on the winners");
}

// Visits every feasible coalition (as sorted index lists), empty one included.
// Returns false if the visit count would exceed the cap.
bool for_each_feasible(const AuctionInstance& instance, std::size_t cap,
                       const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<std::vector<int>> bundles(instance.bids.size());
  for (std::size_t i = 0; i < instance.bids.size(); ++i)
    for (const std::string& item : instance.bids[i].bundle)
      bundles[i].push_back(instance.item_index(item));

  std::vector<char> used(instance.items.size(), 0);
  std::vector<int> chosen;
  std::size_t count = 0;
  bool ok = true;

  std::function<void(std::size_t)> dfs = [&](std::size_t pos) {
    if (!ok) return;
    if (pos == bundles.size()) {
      if (++count > cap) {
        ok = false;
        return;
      }
      visit(chosen);
      return;
    }
    bool free = true;
    for (int m : bundles[pos])
      if (used[m]) {
        free = false;
        break;
      }
    if (free) {
      for (int m : bundles[pos]) used[m] = 1;
      chosen.push_back(static_cast<int>(pos));
      dfs(pos + 1);
      chosen.pop_back();
      for (int m : bundles[pos]) used[m] = 0;
    }
    dfs(pos + 1);
  };
  dfs(0);
  return ok;
}

}  // namespace

int CorePolytope::coord(const std::string& winner) const {
  auto it = std::lower_bound(winners.begin(), winners.end(), winner);
  if (it == winners.end() || *it != winner) return -1;
  return static_cast<int>(it - winners.begin());
}

double CorePolytope::max_violation(const std::vector<double>& prices) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < winners.size(); ++i) {
    worst = std::max(worst, lower_bounds[i].to_double() - prices[i]);
    if (upper_bounds[i]) worst = std::max(worst, prices[i] - upper_bounds[i]->to_double());
  }
  for (const CoreConstraint& c : constraints) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < winners.size(); ++i)
      if (c.indicator[i]) lhs += prices[i];
    worst = std::max(worst, c.rhs.to_double() - lhs);
  }
  return worst;
}

CorePolytope make_box_polytope(const AuctionInstance& instance, const Coalition& winners) {
  CorePolytope p;
  p.winners = winners.members;  // already sorted
  p.lower_bounds.assign(p.winners.size(), Money::zero());
  for (const std::string& id : p.winners) {
    Money bid = instance.bid_of(id).amount;
    p.upper_bounds.push_back(bid);
    p.feasible_point.push_back(bid.to_double());
  }
  return p;
}

CoreConstraint constraint_for_coalition(const AuctionInstance& instance,
                                        const CorePolytope& polytope, const Coalition& c) {
  CoreConstraint row;
  row.coalition = c;
  row.indicator.assign(polytope.winners.size(), 1);
  row.rhs = Money::zero();
  for (const std::string& id : c.members) {
    int w = polytope.coord(id);
    if (w >= 0)
      row.indicator[w] = 0;  // winner keeps its price in the switch
    else
      row.rhs += instance.bid_of(id).amount;
  }
  return row;
}

CoreMembership is_in_core(const AuctionInstance& instance, const Coalition& winners,
                          const std::map<std::string, double>& prices) {
  instance.validate();
  check_ir_bounds(instance, winners, prices);

  double revenue = 0.0;
  for (const auto& [id, p] : prices) revenue += p;

  CoreMembership result;
  if (instance.bids.size() <= kExhaustiveBuyerCap) {
    bool complete = for_each_feasible(
        instance, std::size_t{1} << kExhaustiveBuyerCap, [&](const std::vector<int>& members) {
          double value = 0.0;
          for (int i : members) {
            const Bid& b = instance.bids[i];
            auto it = prices.find(b.buyer);
            value += it != prices.end() ? it->second : b.amount.to_double();
          }
          double violation = value - revenue;
          if (violation > kViolationTol) {
            std::vector<std::string> ids;
            for (int i : members) ids.push_back(instance.bids[i].buyer);
            result.violated.emplace_back(Coalition::of(std::move(ids)), violation);
          }
        });
    if (complete) {
      std::stable_sort(result.violated.begin(), result.violated.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      result.in_core = result.violated.empty();
      return result;
    }
    result.violated.clear();
  }

  auto worst = find_most_violated_coalition(instance, winners, prices);
  result.in_core = !worst.has_value();
  if (worst) result.violated.push_back(*worst);
  return result;
}

std::optional<std::pair<Coalition, double>> find_most_violated_coalition(
    const AuctionInstance& instance, const Coalition& winners,
    const std::map<std::string, double>& prices) {
  check_ir_bounds(instance, winners, prices);

  std::vector<std::vector<int>> bundles(instance.bids.size());
  std::vector<double> values(instance.bids.size());
  for (std::size_t i = 0; i < instance.bids.size(); ++i) {
    const Bid& b = instance.bids[i];
    for (const std::string& item : b.bundle) bundles[i].push_back(instance.item_index(item));
    std::sort(bundles[i].begin(), bundles[i].end());
    auto it = prices.find(b.buyer);
    values[i] = it != prices.end() ? it->second : b.amount.to_double();
  }

  detail::CoalitionSearch<double> search(std::move(bundles), std::move(values),
                                         static_cast<int>(instance.items.size()));
  double revenue = 0.0;
  for (const auto& [id, p] : prices) revenue += p;
  {
    // The winner set itself is feasible with value equal to the revenue.
    std::vector<int> idx;
    for (const std::string& id : winners.members) idx.push_back(instance.buyer_index(id));
    search.set_incumbent(std::move(idx), revenue);
  }
  auto best = search.run();
  double violation = best.value - revenue;
  if (violation <= kViolationTol) return std::nullopt;

  std::vector<std::string> ids;
  for (int i : best.members) ids.push_back(instance.bids[i].buyer);
  return std::make_pair(Coalition::of(std::move(ids)), violation);
}

CorePolytope enumerate_core_polytope(const AuctionInstance& instance, const Coalition& winners,
                                     std::size_t max_coalitions) {
  instance.validate();
  CorePolytope polytope = make_box_polytope(instance, winners);

  std::vector<CoreConstraint> rows;
  bool complete = for_each_feasible(instance, max_coalitions, [&](const std::vector<int>& members) {
    std::vector<std::string> ids;
    for (int i : members) ids.push_back(instance.bids[i].buyer);
    rows.push_back(constraint_for_coalition(instance, polytope, Coalition::of(std::move(ids))));
  });
  if (!complete)
    throw ResourceLimitError("feasible coalition count exceeds cap of " +
                             std::to_string(max_coalitions));

  // Fold single-winner rows into the box lower bounds.
  std::erase_if(rows, [&](const CoreConstraint& row) {
    int nonzero = -1;
    for (std::size_t i = 0; i < row.indicator.size(); ++i) {
      if (!row.indicator[i]) continue;
      if (nonzero >= 0) return false;
      nonzero = static_cast<int>(i);
    }
    if (nonzero < 0) return true;  // vacuous for an efficient winner set
    polytope.lower_bounds[nonzero] = std::max(polytope.lower_bounds[nonzero], row.rhs);
    return true;
  });

  // Rows implied by the lower bounds alone.
  auto bound_sum = [&](const CoreConstraint& row) {
    Money s;
    for (std::size_t i = 0; i < row.indicator.size(); ++i)
      if (row.indicator[i]) s += polytope.lower_bounds[i];
    return s;
  };
  std::erase_if(rows, [&](const CoreConstraint& row) { return bound_sum(row) >= row.rhs; });

  // Same indicator: keep the tightest rhs.
  std::stable_sort(rows.begin(), rows.end(), [](const CoreConstraint& a, const CoreConstraint& b) {
    return a.indicator != b.indicator ? a.indicator < b.indicator : a.rhs > b.rhs;
  });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const CoreConstraint& a, const CoreConstraint& b) {
                           return a.indicator == b.indicator;
                         }),
             rows.end());

  // Pairwise dominance: a row is redundant if another row over a subset of
  // its winners, padded with lower bounds on the difference, already forces
  // at least the same total.
  std::vector<char> dominated(rows.size(), 0);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < rows.size(); ++b) {
      if (a == b || dominated[a] || dominated[b]) continue;
      bool subset = true;
      Money pad;
      for (std::size_t i = 0; i < rows[a].indicator.size(); ++i) {
        if (rows[b].indicator[i] && !rows[a].indicator[i]) {
          subset = false;
          break;
        }
        if (rows[a].indicator[i] && !rows[b].indicator[i]) pad += polytope.lower_bounds[i];
      }
      if (subset && rows[b].rhs + pad >= rows[a].rhs) dominated[a] = 1;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!dominated[i]) polytope.constraints.push_back(std::move(rows[i]));
  return polytope;
}

std::vector<CoreConstraint> enumerate_core_constraints(const AuctionInstance& instance,
                                                       const Coalition& winners,
                                                       std::size_t max_coalitions) {
  return enumerate_core_polytope(instance, winners, max_coalitions).constraints;
}

}  // namespace csa
