#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace csa::detail {

// Branch-and-bound search for a maximum-value feasible coalition (bundles
// pairwise disjoint). Shared by the winner determination problem (exact
// int64 values) and the core separation oracle (double values).
//
// Buyers are explored in order of decreasing bid density (value per item).
// The bound at a node sums, over still-free items, the best per-item value
// density among not-yet-considered buyers; this dominates any feasible
// completion. Ties in value are never pruned so a tie preference can pick
// among all maximizers.
template <typename ValueT>
class CoalitionSearch {
public:
  // bundles[i] lists item indices of buyer i (indices in [0, item_count)).
  CoalitionSearch(std::vector<std::vector<int>> bundles, std::vector<ValueT> values,
                  int item_count)
      : bundles_(std::move(bundles)), values_(std::move(values)), item_count_(item_count) {}

  void exclude(int buyer) { excluded_.push_back(buyer); }

  // Known feasible coalition to prune against from the start.
  void set_incumbent(std::vector<int> members, ValueT value) {
    std::sort(members.begin(), members.end());
    incumbent_ = Result{std::move(members), value};
  }

  // prefer(a, b): true if coalition a (sorted buyer indices) is strictly
  // preferred to b among equal-value coalitions.
  void set_preference(std::function<bool(const std::vector<int>&, const std::vector<int>&)> p) {
    prefer_ = std::move(p);
  }

  struct Result {
    std::vector<int> members;  // sorted buyer indices
    ValueT value{};
  };

  Result run() {
    const int n = static_cast<int>(bundles_.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<char> skip(n, 0);
    for (int e : excluded_) skip[e] = 1;
    std::erase_if(order_, [&](int i) { return skip[i] || bundles_[i].empty(); });
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return density(a) > density(b);
    });

    // Two suffix tables over order positions: the best per-item density, and
    // the best per-item value among single-item buyers. The second feeds a
    // bound that is tight when packages compete with single-item bids.
    const int k = static_cast<int>(order_.size());
    suffix_best_.assign(static_cast<std::size_t>(k + 1) * item_count_, 0.0);
    suffix_single_.assign(static_cast<std::size_t>(k + 1) * item_count_, 0.0);
    for (int pos = k - 1; pos >= 0; --pos) {
      std::size_t off = static_cast<std::size_t>(pos) * item_count_;
      std::copy(&suffix_best_[off + item_count_], &suffix_best_[off + 2 * item_count_],
                &suffix_best_[off]);
      std::copy(&suffix_single_[off + item_count_], &suffix_single_[off + 2 * item_count_],
                &suffix_single_[off]);
      int i = order_[pos];
      double d = density(i);
      for (int m : bundles_[i]) suffix_best_[off + m] = std::max(suffix_best_[off + m], d);
      if (bundles_[i].size() == 1) {
        int m = bundles_[i][0];
        suffix_single_[off + m] =
            std::max(suffix_single_[off + m], static_cast<double>(values_[i]));
      }
    }
    multi_positions_.clear();
    for (int pos = 0; pos < k; ++pos)
      if (bundles_[order_[pos]].size() > 1) multi_positions_.push_back(pos);

    best_.members.clear();
    best_.value = ValueT{};
    if (incumbent_ && incumbent_->value > best_.value) best_ = *incumbent_;
    used_.assign(item_count_, 0);
    chosen_.clear();
    dfs(0, ValueT{});
    return best_;
  }

private:
  double density(int i) const {
    return static_cast<double>(values_[i]) / static_cast<double>(bundles_[i].size());
  }

  double bound_at(int pos) const {
    const double* dens = suffix_best_.data() + static_cast<std::size_t>(pos) * item_count_;
    const double* single = suffix_single_.data() + static_cast<std::size_t>(pos) * item_count_;
    double by_density = 0.0;
    double by_single = 0.0;
    for (int m = 0; m < item_count_; ++m) {
      if (used_[m]) continue;
      by_density += dens[m];
      by_single += single[m];
    }
    // Each available package can beat the single-item cover of its bundle by
    // at most its excess over that cover.
    for (int mp : multi_positions_) {
      if (mp < pos) continue;
      int i = order_[mp];
      double cover = 0.0;
      bool free = true;
      for (int m : bundles_[i]) {
        if (used_[m]) {
          free = false;
          break;
        }
        cover += single[m];
      }
      if (!free) continue;
      double excess = static_cast<double>(values_[i]) - cover;
      if (excess > 0) by_single += excess;
    }
    return std::min(by_density, by_single);
  }

  // Margin keeps fp error in the double-valued bound from pruning exact ties.
  static double prune_margin() {
    if constexpr (std::is_same_v<ValueT, std::int64_t>)
      return 0.5;
    else
      return 1e-9;
  }

  void dfs(int pos, ValueT value) {
    if (pos == static_cast<int>(order_.size())) {
      consider(value);
      return;
    }
    if (static_cast<double>(value) + bound_at(pos) <
        static_cast<double>(best_.value) - prune_margin())
      return;

    int i = order_[pos];
    bool free = true;
    for (int m : bundles_[i])
      if (used_[m]) {
        free = false;
        break;
      }
    if (free) {
      for (int m : bundles_[i]) used_[m] = 1;
      chosen_.push_back(i);
      dfs(pos + 1, value + values_[i]);
      chosen_.pop_back();
      for (int m : bundles_[i]) used_[m] = 0;
    }
    dfs(pos + 1, value);
  }

  void consider(ValueT value) {
    if (value > best_.value) {
      best_.value = value;
      best_.members = sorted_chosen();
      return;
    }
    if (prefer_ && value == best_.value) {
      auto cand = sorted_chosen();
      if (cand != best_.members && prefer_(cand, best_.members)) best_.members = std::move(cand);
    }
  }

  std::vector<int> sorted_chosen() const {
    std::vector<int> s = chosen_;
    std::sort(s.begin(), s.end());
    return s;
  }

  std::vector<std::vector<int>> bundles_;
  std::vector<ValueT> values_;
  int item_count_;
  std::vector<int> excluded_;
  std::optional<Result> incumbent_;
  std::function<bool(const std::vector<int>&, const std::vector<int>&)> prefer_;

  std::vector<int> order_;
  std::vector<double> suffix_best_;
  std::vector<double> suffix_single_;
  std::vector<int> multi_positions_;
  std::vector<char> used_;
  std::vector<int> chosen_;
  Result best_;
};

}  // namespace csa::detail
