#include "csa/mrc.hpp"

#include <cmath>

#include "csa/errors.hpp"
#include "csa/simplex.hpp"

namespace csa {

namespace {

void require_efficient(const AuctionInstance& instance, const Coalition& winners) {
  instance.validate();
  if (!is_feasible(instance, winners) ||
      coalition_welfare(instance, winners) != solve_wdp(instance).welfare)
    throw PreconditionError("winner set is not an efficient allocation");
}

void append_row_or_fail(CorePolytope& polytope, const CoreConstraint& row, double violation) {
  for (const CoreConstraint& existing : polytope.constraints)
    if (existing.indicator == row.indicator && existing.rhs >= row.rhs)
      throw NumericalFailureError("separation oracle returned an already-enforced constraint",
                                  violation, 0.0);
  polytope.constraints.push_back(row);
}

}  // namespace

std::pair<double, std::vector<double>> min_revenue_over(const CorePolytope& polytope) {
  const int n = static_cast<int>(polytope.winners.size());
  // Shift prices by their lower bounds: x = p - lo, 0 <= x <= hi - lo.
  std::vector<double> lo(n), width(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = polytope.lower_bounds[j].to_double();
    width[j] = polytope.upper_bounds[j]
                   ? polytope.upper_bounds[j]->to_double() - lo[j]
                   : -1.0;  // unbounded above
  }

  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (const CoreConstraint& row : polytope.constraints) {
    std::vector<double> a(n, 0.0);
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!row.indicator[j]) continue;
      a[j] = -1.0;
      shift += lo[j];
    }
    A.push_back(std::move(a));
    b.push_back(shift - row.rhs.to_double());
  }
  for (int j = 0; j < n; ++j) {
    if (width[j] < 0) continue;
    std::vector<double> a(n, 0.0);
    a[j] = 1.0;
    A.push_back(std::move(a));
    b.push_back(width[j]);
  }

  std::vector<double> c(n, -1.0);
  LpResult lp = simplex_maximize(A, b, c);
  if (!lp.feasible || !lp.bounded)
    throw NumericalFailureError("minimum-revenue LP failed (empty or unbounded relaxation)", 0.0,
                                0.0);

  std::vector<double> prices(n);
  double revenue = 0.0;
  for (int j = 0; j < n; ++j) {
    prices[j] = lp.x[j] + lo[j];
    revenue += prices[j];
  }
  return {revenue, prices};
}

double min_core_revenue(const AuctionInstance& instance, const Coalition& winners) {
  require_efficient(instance, winners);
  CorePolytope polytope = make_box_polytope(instance, winners);
  for (int round = 0; round <= kMaxSeparationRounds; ++round) {
    auto [revenue, prices] = min_revenue_over(polytope);
    auto violated = find_most_violated_coalition(instance, winners, price_map(polytope, prices));
    if (!violated) return revenue;
    append_row_or_fail(polytope, constraint_for_coalition(instance, polytope, violated->first),
                       violated->second);
  }
  throw NumericalFailureError("minimum-revenue constraint generation exceeded round cap", 0.0, 0.0);
}

MrcResult mrc_quadratic_price(const AuctionInstance& instance, const Coalition& winners,
                              const std::map<std::string, double>& reference,
                              const std::vector<CoreConstraint>* seed_rows) {
  require_efficient(instance, winners);
  MrcResult out;
  out.polytope = make_box_polytope(instance, winners);
  if (seed_rows)
    for (const CoreConstraint& row : *seed_rows)
      if (row.indicator.size() == out.polytope.winners.size())
        out.polytope.constraints.push_back(row);

  const int n = static_cast<int>(out.polytope.winners.size());
  std::vector<double> ref = reference_in_order(out.polytope, reference);

  for (int round = 0; round <= kMaxSeparationRounds; ++round) {
    auto [floor_revenue, lp_point] = min_revenue_over(out.polytope);

    // Pin total revenue to the floor with a two-sided band, then project.
    std::vector<GeneralConstraint> band(2);
    band[0].coeffs.assign(n, 1.0);
    band[0].rhs = floor_revenue - kRevenueBand;
    band[1].coeffs.assign(n, -1.0);
    band[1].rhs = -(floor_revenue + kRevenueBand);
    WarmStart warm{lp_point, {}};
    out.projection = project_onto_polytope(out.polytope, ref, warm, band);
    out.prices = out.projection.prices;

    auto violated =
        find_most_violated_coalition(instance, winners, price_map(out.polytope, out.prices));
    if (!violated) {
      out.min_revenue = floor_revenue;
      out.revenue_certificate.lp_min_revenue = floor_revenue;
      out.revenue_certificate.separation_clean = true;
      double attained = 0.0;
      for (double p : out.prices) attained += p;
      out.revenue_certificate.attained_revenue = attained;
      for (std::size_t i = 0; i < out.polytope.constraints.size(); ++i) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j)
          if (out.polytope.constraints[i].indicator[j]) lhs += out.prices[j];
        if (std::abs(lhs - out.polytope.constraints[i].rhs.to_double()) <= 1e-7)
          out.revenue_certificate.binding_rows.push_back(static_cast<int>(i));
      }
      return out;
    }
    append_row_or_fail(out.polytope,
                       constraint_for_coalition(instance, out.polytope, violated->first),
                       violated->second);
  }
  throw NumericalFailureError("minimum-revenue-core selection exceeded round cap", 0.0, 0.0);
}

}  // namespace csa
