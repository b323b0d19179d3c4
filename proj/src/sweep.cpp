#include "csa/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "csa/errors.hpp"
#include "csa/mrc.hpp"
#include "csa/projection.hpp"

namespace csa {

namespace {

constexpr double kCurveEps = 1e-9;  // breakpoint merge tolerance

PriceCurve make_curve(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  PriceCurve c;
  for (const auto& pt : pts) {
    if (!c.points.empty() && pt.first - c.points.back().first < kCurveEps) continue;
    c.points.push_back(pt);
  }
  if (c.points.size() < 2) throw InvalidInputError("price curve needs a nonempty offset range");
  return c;
}

// min(curve, c0 + c1 * theta) with crossing points inserted.
PriceCurve curve_min_with_line(const PriceCurve& in, double c0, double c1) {
  std::vector<std::pair<double, double>> pts;
  auto line = [&](double th) { return c0 + c1 * th; };
  for (std::size_t i = 0; i < in.points.size(); ++i) {
    auto [th, y] = in.points[i];
    pts.emplace_back(th, std::min(y, line(th)));
    if (i + 1 == in.points.size()) continue;
    auto [th2, y2] = in.points[i + 1];
    double da = y - line(th);
    double db = y2 - line(th2);
    if ((da > 0 && db < 0) || (da < 0 && db > 0)) {
      double cross = th + (th2 - th) * da / (da - db);
      pts.emplace_back(cross, line(cross));
    }
  }
  return make_curve(std::move(pts));
}

PriceCurve curve_max_with_const(const PriceCurve& in, double level) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < in.points.size(); ++i) {
    auto [th, y] = in.points[i];
    pts.emplace_back(th, std::max(y, level));
    if (i + 1 == in.points.size()) continue;
    auto [th2, y2] = in.points[i + 1];
    double da = y - level;
    double db = y2 - level;
    if ((da > 0 && db < 0) || (da < 0 && db > 0))
      pts.emplace_back(th + (th2 - th) * da / (da - db), level);
  }
  return make_curve(std::move(pts));
}

PriceCurve curve_restrict(const PriceCurve& in, double lo, double hi) {
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(lo, in.value_at(lo));
  for (const auto& pt : in.points)
    if (pt.first > lo + kCurveEps && pt.first < hi - kCurveEps) pts.push_back(pt);
  pts.emplace_back(hi, in.value_at(hi));
  return make_curve(std::move(pts));
}

}  // namespace

std::string payment_rule_name(PaymentRule rule) {
  switch (rule) {
    case PaymentRule::Vickrey:
      return "vickrey";
    case PaymentRule::QuadraticCore:
      return "quad-core";
    case PaymentRule::MrcQuadratic:
      return "mrc-quad";
  }
  return "?";
}

PaymentRule parse_payment_rule(const std::string& name) {
  if (name == "vickrey") return PaymentRule::Vickrey;
  if (name == "quad-core") return PaymentRule::QuadraticCore;
  if (name == "mrc-quad") return PaymentRule::MrcQuadratic;
  throw InvalidInputError("unknown payment rule '" + name + "'");
}

std::vector<double> PriceCurve::slopes() const {
  std::vector<double> s;
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    s.push_back((points[i + 1].second - points[i].second) /
                (points[i + 1].first - points[i].first));
  return s;
}

double PriceCurve::value_at(double theta) const {
  if (points.empty()) throw InvalidInputError("empty price curve");
  if (theta <= points.front().first + 1e-12 && theta >= points.front().first - 1e-9)
    return points.front().second;
  if (theta >= points.back().first - 1e-12 && theta <= points.back().first + 1e-9)
    return points.back().second;
  if (theta < points.front().first || theta > points.back().first)
    throw InvalidInputError("offset outside the swept range");
  auto it = std::upper_bound(points.begin(), points.end(), std::make_pair(theta, 1e300));
  auto [th2, y2] = *it;
  auto [th1, y1] = *(it - 1);
  return y1 + (y2 - y1) * (theta - th1) / (th2 - th1);
}

MidReport compute_mid(const PriceCurve& curve, PaymentRule rule) {
  if (curve.points.empty()) throw InvalidInputError("empty price curve");
  MidReport rep;
  rep.rule = rule;
  rep.arg_theta = curve.points.front().first;
  std::vector<double> s = curve.slopes();
  rep.max_slope = s.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > rep.max_slope) {
      rep.max_slope = s[i];
      rep.arg_theta = curve.points[i].first;
    }
    if (s[i] > 1.0 + kMidSlopeTol)
      rep.violations.push_back({curve.points[i].first, curve.points[i + 1].first, s[i]});
  }
  return rep;
}

namespace {

// Kinks of one linear piece of the multiplier sum around `theta`, from the
// local model's event algebra. Returns the piece's validity interval.
std::pair<double, double> piece_interval(const StarInstance& star, const StarLocalModel& model,
                                         double theta) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto note = [&](double event) {
    if (event < theta - 1e-12) lo = std::max(lo, event);
    if (event > theta + 1e-12) hi = std::min(hi, event);
  };

  for (int j = 0; j < star.spoke_count(); ++j) {
    double cap = star.bundle_slack(j) + theta;
    // Saturation crossings: cap(theta') = margin.
    for (int k = 0; k < star.leaf_count(j); ++k)
      note(theta + (star.margin(j, k) - cap));

    if (model.active[j]) {
      double lambda = model.sol.spoke_multipliers[j];
      double rate = model.spoke_slope[j];
      // Multiplier meets a saturated drop level (the margin value).
      for (int k = 0; k < star.leaf_count(j); ++k) {
        if (star.margin(j, k) >= cap) continue;  // unsaturated handled below
        if (std::abs(rate) > 1e-14) note(theta + (star.margin(j, k) - lambda) / rate);
      }
      // Multiplier meets the growing cap line (slope 1).
      if (std::abs(1.0 - rate) > 1e-14) note(theta + (lambda - cap) / (rate - 1.0));
      // Multiplier hits zero.
      if (std::abs(rate) > 1e-14) note(theta - lambda / rate);
    } else {
      // Inactive spoke: activation when the response inequality tightens.
      double chi0 = 0.0;
      for (int k = 0; k < star.leaf_count(j); ++k)
        chi0 += std::min(cap, star.margin(j, k));
      double gap = (model.sol.multiplier_sum + star.bundle_slack(j)) - chi0;
      double gap_rate = model.sum_slope - model.growing[j];
      if (std::abs(gap_rate) > 1e-14) note(theta - gap / gap_rate);
    }
  }
  return {lo, hi};
}

// Exact kink set of the multiplier sum on [0, theta_max].
std::vector<double> star_sum_kinks(const StarInstance& star, double theta_max) {
  std::set<double> kinks{0.0, theta_max};
  for (int j = 0; j < star.spoke_count(); ++j)
    for (int k = 0; k < star.leaf_count(j); ++k) {
      double cross = star.margin(j, k) - star.bundle_slack(j);
      if (cross > kCurveEps && cross < theta_max - kCurveEps) kinks.insert(cross);
    }

  std::vector<std::pair<double, double>> segments;
  {
    auto it = kinks.begin();
    double prev = *it;
    for (++it; it != kinks.end(); ++it) {
      segments.emplace_back(prev, *it);
      prev = *it;
    }
  }

  int guard = 0;
  while (!segments.empty()) {
    if (++guard > 100000)
      throw NumericalFailureError("piecewise sweep failed to converge", 0.0, 0.0);
    auto [a, b] = segments.back();
    segments.pop_back();
    if (b - a <= 1e-10) continue;

    // A midpoint whose local model is clear of breakpoints.
    StarLocalModel model;
    double m = 0.0;
    bool ok = false;
    for (double frac : {0.5, 0.37, 0.61, 0.23, 0.79, 0.45, 0.55}) {
      m = a + frac * (b - a);
      try {
        model = star_local_model(star, m);
        ok = true;
        break;
      } catch (const BoundaryPointError&) {
      }
    }
    if (!ok) {
      // Degenerate stretch: fall back to plain subdivision.
      double mid = 0.5 * (a + b);
      kinks.insert(mid);
      segments.emplace_back(a, mid);
      segments.emplace_back(mid, b);
      continue;
    }

    auto [lo, hi] = piece_interval(star, model, m);
    std::vector<double> cuts;
    if (lo > a + 1e-10 && lo < b - 1e-10) cuts.push_back(lo);
    if (hi > a + 1e-10 && hi < b - 1e-10) cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    if (cuts.empty()) continue;  // the segment is one linear piece
    double prev = a;
    for (double cut : cuts) {
      kinks.insert(cut);
      segments.emplace_back(prev, cut);
      prev = cut;
    }
    segments.emplace_back(prev, b);
  }
  return {kinks.begin(), kinks.end()};
}

}  // namespace

PriceCurve sweep_star_relaxed_curve(const StarInstance& star, double theta_max) {
  star.validate();
  if (!(theta_max > 0)) throw InvalidInputError("theta_max must be positive");
  double v0 = star.hub_vickrey().to_double();
  std::vector<double> kinks = star_sum_kinks(star, theta_max);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(kinks.size());
  for (double th : kinks) pts.emplace_back(th, v0 + solve_star(star, th).multiplier_sum);
  return make_curve(std::move(pts));
}

PriceCurve sweep_star_curve(const StarInstance& star, double theta_max, PaymentRule rule) {
  star.validate();
  if (!(theta_max > 0)) throw InvalidInputError("theta_max must be positive");
  double v0 = star.hub_vickrey().to_double();

  if (rule == PaymentRule::Vickrey)
    return make_curve({{0.0, v0}, {theta_max, v0}});

  PriceCurve relaxed = sweep_star_relaxed_curve(star, theta_max);

  // Clamp by the hub winner's own bid line v0 + theta.
  PriceCurve quad = curve_min_with_line(relaxed, v0, 1.0);
  if (rule == PaymentRule::QuadraticCore || star.spoke_count() == 1) return quad;

  double second_floor = star.second_spoke_floor();
  double split = second_floor - v0;
  if (split >= theta_max - kCurveEps)
    return make_curve({{0.0, v0}, {theta_max, v0 + theta_max}});
  if (split <= kCurveEps) return curve_max_with_const(quad, second_floor);

  // Bid-following segment up to the second spoke floor, then the clamped
  // projection price pushed up to that floor.
  std::vector<std::pair<double, double>> merged{{0.0, v0}, {split, v0 + split}};
  PriceCurve right = curve_max_with_const(curve_restrict(quad, split, theta_max), second_floor);
  for (const auto& pt : right.points) merged.push_back(pt);
  return make_curve(std::move(merged));
}

namespace {

double price_for_rule(const AuctionInstance& inst, const Coalition& winners,
                      const std::string& buyer, PaymentRule rule,
                      const std::vector<CoreConstraint>* seed) {
  auto vick = vickrey_prices(inst, winners);
  if (rule == PaymentRule::Vickrey) return vick.at(buyer).to_double();
  auto reference = to_double_prices(vick);
  if (rule == PaymentRule::QuadraticCore) {
    CoreProjection proj = project_onto_core(inst, winners, reference, seed);
    return proj.result.prices[proj.polytope.coord(buyer)];
  }
  MrcResult mrc = mrc_quadratic_price(inst, winners, reference, seed);
  return mrc.prices[mrc.polytope.coord(buyer)];
}

}  // namespace

PriceCurve sweep_generic_curve(const AuctionInstance& instance, const std::string& buyer,
                               Money bid_lo, Money bid_hi, const GenericSweepOptions& options) {
  instance.validate();
  if (instance.buyer_index(buyer) < 0) throw InvalidInputError("unknown buyer '" + buyer + "'");
  if (!(bid_lo < bid_hi)) throw InvalidInputError("empty sweep range");

  Money range = bid_hi - bid_lo;
  Money step = options.step;
  if (step <= Money::zero()) step = Money::from_units(std::max<std::int64_t>(range.units() / 200, 1));

  AuctionInstance base = instance.with_bid(buyer, bid_lo);
  WdpResult base_wdp = solve_wdp(base, options.tie);
  if (!base_wdp.winners.contains(buyer))
    throw PreconditionError("buyer '" + buyer + "' does not win at the low end of the range");

  // Seed all later solves with the rows generated at the low end.
  std::vector<CoreConstraint> seed;
  if (options.rule != PaymentRule::Vickrey) {
    CoreProjection proj =
        project_onto_core(base, base_wdp.winners, to_double_prices(vickrey_prices(base, base_wdp.winners)));
    seed = proj.polytope.constraints;
  }

  std::vector<Money> grid;
  for (Money bid = bid_lo; bid < bid_hi; bid += step) grid.push_back(bid);
  grid.push_back(bid_hi);

  struct Sample {
    double theta = 0.0;
    double price = 0.0;
    bool winner_changed = false;
  };

  auto evaluate = [&](Money bid) -> Sample {
    AuctionInstance inst = instance.with_bid(buyer, bid);
    WdpResult wdp = solve_wdp(inst, options.tie);
    if (!(wdp.winners == base_wdp.winners)) return {bid.to_double(), 0.0, true};
    double price = price_for_rule(inst, wdp.winners, buyer, options.rule, &seed);
    return {(bid - bid_lo).to_double(), price, false};
  };

  std::vector<Sample> samples(grid.size());
  int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = evaluate(grid[i]);
  } else {
    std::vector<std::thread> pool;
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t next = 0;
    std::mutex next_mutex;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= grid.size()) return;
            i = next++;
          }
          try {
            samples[i] = evaluate(grid[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].winner_changed) continue;
    // Localize the winner-set change on the money grid.
    Money good = i > 0 ? grid[i - 1] : bid_lo;
    Money bad = grid[i];
    while (bad - good > Money::from_units(1)) {
      Money mid = Money::from_units((good.units() + bad.units()) / 2);
      AuctionInstance inst = instance.with_bid(buyer, mid);
      if (solve_wdp(inst, options.tie).winners == base_wdp.winners)
        good = mid;
      else
        bad = mid;
    }
    throw RangeInvalidError("winner set changes inside the sweep range at bid " + bad.to_string(),
                            bad.to_double());
  }

  // Adaptive refinement where adjacent secant slopes disagree.
  std::int64_t floor_units =
      std::max<std::int64_t>(static_cast<std::int64_t>(1e-6 * range.units()), 1);
  std::vector<std::pair<Money, Sample>> extra;
  std::vector<std::pair<Money, Money>> work;
  auto slope = [&](const Sample& a, const Sample& b) {
    return (b.price - a.price) / (b.theta - a.theta);
  };
  for (std::size_t i = 0; i + 2 < samples.size(); ++i)
    if (std::abs(slope(samples[i], samples[i + 1]) - slope(samples[i + 1], samples[i + 2])) > 1e-7)
      work.emplace_back(grid[i], grid[i + 2]);

  std::map<std::int64_t, Sample> refined;
  int guard = 0;
  while (!work.empty() && ++guard < 20000) {
    auto [lo, hi] = work.back();
    work.pop_back();
    if ((hi - lo).units() <= 2 * floor_units) continue;
    Money mid = Money::from_units((lo.units() + hi.units()) / 2);
    if (refined.count(mid.units())) continue;
    Sample sm = evaluate(mid);
    if (sm.winner_changed)
      throw RangeInvalidError("winner set changes inside the sweep range", mid.to_double());
    refined[mid.units()] = sm;
    work.emplace_back(lo, mid);
    work.emplace_back(mid, hi);
  }

  std::vector<std::pair<double, double>> pts;
  for (const Sample& s : samples) pts.emplace_back(s.theta, s.price);
  for (const auto& [units, s] : refined) pts.emplace_back(s.theta, s.price);
  return make_curve(std::move(pts));
}

LowerBoundScenario generate_lower_bound_scenario(int w, Money delta) {
  if (w < 2) throw InvalidInputError("the lower bound needs at least two winners");
  Money one = Money::from_value(1);
  if (delta <= Money::zero() || delta * (w - 1) > one)
    throw InvalidInputError("delta must lie in (0, 1/(w-1)]");

  LowerBoundScenario sc;
  sc.winner_count = w;
  sc.delta = delta;

  AuctionInstance inst;
  std::vector<std::string> small_ids;
  std::vector<std::string> all_items;
  char name[16];
  for (int i = 0; i < w; ++i) {
    std::snprintf(name, sizeof(name), "x%02d", i + 1);
    inst.items.push_back(name);
    all_items.push_back(name);
  }
  for (int i = 0; i < w; ++i) {
    std::snprintf(name, sizeof(name), "s%02d", i + 1);
    small_ids.push_back(name);
    inst.bids.push_back({name, one + delta, {inst.items[i]}});
  }
  inst.bids.push_back({"big", Money::from_value(w), all_items});

  sc.deviating_buyer = small_ids[0];
  sc.scenario_two = inst;
  sc.scenario_one = inst.with_bid(sc.deviating_buyer, one - delta * (w - 1));
  sc.tie = TieBreakPolicy::prefer(Coalition::of(small_ids));
  return sc;
}

LowerBoundReport verify_lower_bound(const LowerBoundScenario& scenario, PaymentRule rule) {
  const std::string& dev = scenario.deviating_buyer;

  auto solve_scenario = [&](const AuctionInstance& inst) {
    WdpResult wdp = solve_wdp(inst, scenario.tie);
    Coalition expected = scenario.tie.designated;
    if (!(wdp.winners == expected))
      throw PreconditionError("lower-bound scenario produced an unexpected winner set");
    return wdp;
  };

  WdpResult one = solve_scenario(scenario.scenario_one);
  WdpResult two = solve_scenario(scenario.scenario_two);

  LowerBoundReport rep;
  PaymentRule priced_rule = rule == PaymentRule::Vickrey ? PaymentRule::QuadraticCore : rule;

  // Scenario one: the tie pins the core to the bid vector itself.
  {
    auto vick = vickrey_prices(scenario.scenario_one, one.winners);
    auto reference = to_double_prices(vick);
    std::vector<double> prices;
    const CorePolytope* poly = nullptr;
    CoreProjection proj;
    MrcResult mrc;
    if (priced_rule == PaymentRule::QuadraticCore) {
      proj = project_onto_core(scenario.scenario_one, one.winners, reference);
      prices = proj.result.prices;
      poly = &proj.polytope;
    } else {
      mrc = mrc_quadratic_price(scenario.scenario_one, one.winners, reference);
      prices = mrc.prices;
      poly = &mrc.polytope;
    }
    rep.scenario_one_prices_exact = true;
    for (std::size_t i = 0; i < poly->winners.size(); ++i) {
      Money bid = scenario.scenario_one.bid_of(poly->winners[i]).amount;
      if (Money::from_double_rounded(prices[i]) != bid) rep.scenario_one_prices_exact = false;
    }
    rep.price_before = prices[poly->coord(dev)];
  }

  rep.price_after = price_for_rule(scenario.scenario_two, two.winners, dev, priced_rule, nullptr);

  Money bid_before = scenario.scenario_one.bid_of(dev).amount;
  Money bid_after = scenario.scenario_two.bid_of(dev).amount;
  rep.bid_increase = (bid_after - bid_before).to_double();
  rep.price_increase = rep.price_after - rep.price_before;
  rep.ratio = rep.price_increase / rep.bid_increase;
  return rep;
}

}  // namespace csa
