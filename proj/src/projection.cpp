#include "csa/projection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "csa/errors.hpp"

namespace csa {

namespace {

constexpr double kStepTol = 1e-13;
constexpr double kMultiplierTol = 1e-11;
constexpr double kDirectionTol = 1e-12;

// Uniform view of one constraint g.p >= h. Order (rows, then extra rows,
// then lower bounds, then upper bounds) fixes the pivot indices.
struct Facet {
  enum Kind { Row, Extra, Lower, Upper } kind;
  int index;  // row index or coordinate
  double h;
};

struct Problem {
  int n = 0;
  const CorePolytope* polytope = nullptr;
  const std::vector<GeneralConstraint>* extra = nullptr;
  std::vector<Facet> facets;

  double dot(const Facet& f, const std::vector<double>& p) const {
    switch (f.kind) {
      case Facet::Lower:
        return p[f.index];
      case Facet::Upper:
        return -p[f.index];
      case Facet::Row: {
        const auto& ind = polytope->constraints[f.index].indicator;
        double s = 0.0;
        for (int j = 0; j < n; ++j)
          if (ind[j]) s += p[j];
        return s;
      }
      case Facet::Extra: {
        const auto& g = (*extra)[f.index].coeffs;
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += g[j] * p[j];
        return s;
      }
    }
    return 0.0;
  }

  // Adds y * g_f into accum.
  void axpy(const Facet& f, double y, std::vector<double>& accum) const {
    for (int j = 0; j < n; ++j) accum[j] += y * gradient_entry(f, j);
  }

  double gradient_entry(const Facet& f, int j) const {
    switch (f.kind) {
      case Facet::Lower:
        return f.index == j ? 1.0 : 0.0;
      case Facet::Upper:
        return f.index == j ? -1.0 : 0.0;
      case Facet::Row:
        return polytope->constraints[f.index].indicator[j] ? 1.0 : 0.0;
      case Facet::Extra:
        return (*extra)[f.index].coeffs[j];
    }
    return 0.0;
  }
};

Problem build_problem(const CorePolytope& polytope, const std::vector<GeneralConstraint>& extra) {
  Problem prob;
  prob.n = static_cast<int>(polytope.winners.size());
  prob.polytope = &polytope;
  prob.extra = &extra;
  for (std::size_t i = 0; i < polytope.constraints.size(); ++i)
    prob.facets.push_back({Facet::Row, static_cast<int>(i), polytope.constraints[i].rhs.to_double()});
  for (std::size_t i = 0; i < extra.size(); ++i)
    prob.facets.push_back({Facet::Extra, static_cast<int>(i), extra[i].rhs});
  for (int j = 0; j < prob.n; ++j)
    prob.facets.push_back({Facet::Lower, j, polytope.lower_bounds[j].to_double()});
  for (int j = 0; j < prob.n; ++j)
    if (polytope.upper_bounds[j])
      prob.facets.push_back({Facet::Upper, j, -polytope.upper_bounds[j]->to_double()});
  return prob;
}

KKTCertificate compute_certificate(const Problem& prob, const ProjectionResult& res,
                                   const std::vector<double>& reference) {
  KKTCertificate cert;
  std::vector<double> grad(prob.n, 0.0);
  for (const Facet& f : prob.facets) {
    double y = 0.0;
    switch (f.kind) {
      case Facet::Row:
        y = res.multipliers_core[f.index];
        break;
      case Facet::Extra:
        y = res.multipliers_extra[f.index];
        break;
      case Facet::Lower:
        y = res.multipliers_lower[f.index];
        break;
      case Facet::Upper:
        y = res.multipliers_upper[f.index];
        break;
    }
    prob.axpy(f, y, grad);
    double slack = prob.dot(f, res.prices) - f.h;
    cert.primal_residual = std::max(cert.primal_residual, -slack);
    cert.comp_slack_residual = std::max(cert.comp_slack_residual, std::abs(y * slack));
  }
  for (int j = 0; j < prob.n; ++j)
    cert.stationarity_residual =
        std::max(cert.stationarity_residual, std::abs(res.prices[j] - reference[j] - grad[j]));
  return cert;
}

double max_facet_violation(const Problem& prob, const std::vector<double>& p) {
  double worst = 0.0;
  for (const Facet& f : prob.facets) worst = std::max(worst, f.h - prob.dot(f, p));
  return worst;
}

}  // namespace

std::map<std::string, double> price_map(const CorePolytope& polytope,
                                        const std::vector<double>& prices) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < polytope.winners.size(); ++i) out[polytope.winners[i]] = prices[i];
  return out;
}

std::vector<double> reference_in_order(const CorePolytope& polytope,
                                       const std::map<std::string, double>& reference) {
  std::vector<double> r(polytope.winners.size());
  for (std::size_t i = 0; i < polytope.winners.size(); ++i) {
    auto it = reference.find(polytope.winners[i]);
    if (it == reference.end())
      throw InvalidInputError("missing reference price for winner '" + polytope.winners[i] + "'");
    r[i] = it->second;
  }
  return r;
}

std::map<std::string, double> to_double_prices(const std::map<std::string, Money>& prices) {
  std::map<std::string, double> out;
  for (const auto& [id, m] : prices) out[id] = m.to_double();
  return out;
}

ProjectionResult project_onto_polytope(const CorePolytope& polytope,
                                       const std::vector<double>& reference,
                                       const std::optional<WarmStart>& warm,
                                       const std::vector<GeneralConstraint>& extra_rows) {
  const int n = static_cast<int>(polytope.winners.size());
  if (static_cast<int>(reference.size()) != n)
    throw InvalidInputError("reference dimension does not match polytope");
  Problem prob = build_problem(polytope, extra_rows);

  // Starting point: the clipped reference when already feasible, else the
  // caller's warm start or the polytope's known feasible point.
  std::vector<double> p(n);
  std::vector<int> working;  // facet indices, kept sorted
  for (int j = 0; j < n; ++j) {
    double lo = polytope.lower_bounds[j].to_double();
    double hi = polytope.upper_bounds[j] ? polytope.upper_bounds[j]->to_double()
                                         : std::numeric_limits<double>::infinity();
    p[j] = std::clamp(reference[j], lo, hi);
  }
  if (max_facet_violation(prob, p) > kPrimalTol) {
    if (warm) {
      p = warm->start;
      for (int row : warm->active_rows) working.push_back(row);  // rows come first
    } else {
      p = polytope.feasible_point;
    }
    if (static_cast<int>(p.size()) != n || max_facet_violation(prob, p) > kPrimalTol)
      throw InvalidInputError("polytope has no valid feasible starting point");
  }

  ProjectionResult res;
  res.multipliers_core.assign(polytope.constraints.size(), 0.0);
  res.multipliers_upper.assign(n, 0.0);
  res.multipliers_lower.assign(n, 0.0);
  res.multipliers_extra.assign(extra_rows.size(), 0.0);

  double ref_scale = 1.0;
  for (int j = 0; j < n; ++j) ref_scale = std::max(ref_scale, std::abs(reference[j]));

  Eigen::VectorXd y;
  bool dependent = false;
  int iter = 0;
  for (; iter < kMaxQpIterations; ++iter) {
    // Equality-constrained subproblem on the working set:
    //   p* = r + G'y,  G G' y = h_ws - G r.
    const int k = static_cast<int>(working.size());
    Eigen::MatrixXd G(k, n);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) {
      const Facet& f = prob.facets[working[i]];
      double gr = 0.0;
      for (int j = 0; j < n; ++j) {
        double g = prob.gradient_entry(f, j);
        G(i, j) = g;
        gr += g * reference[j];
      }
      rhs(i) = f.h - gr;
    }
    std::vector<double> target(reference);
    dependent = false;
    if (k > 0) {
      Eigen::MatrixXd M = G * G.transpose();
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
      cod.setThreshold(1e-12);
      y = cod.solve(rhs);
      dependent = cod.rank() < k;
      Eigen::VectorXd shift = G.transpose() * y;
      for (int j = 0; j < n; ++j) target[j] += shift(j);
    }

    double step = 0.0;
    for (int j = 0; j < n; ++j) step = std::max(step, std::abs(target[j] - p[j]));

    if (step <= kStepTol * ref_scale) {
      // Stationary on the working set; drop the lowest-index facet with a
      // negative multiplier, or stop if none.
      int drop = -1;
      for (int i = 0; i < k; ++i) {
        if (y(i) < -kMultiplierTol) {
          drop = i;
          break;
        }
      }
      if (drop < 0) break;
      working.erase(working.begin() + drop);
      continue;
    }

    // Step toward the subproblem optimum, stopping at the first facet hit.
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j) d[j] = target[j] - p[j];
    double alpha = 1.0;
    int blocker = -1;
    for (std::size_t fi = 0; fi < prob.facets.size(); ++fi) {
      if (std::binary_search(working.begin(), working.end(), static_cast<int>(fi))) continue;
      const Facet& f = prob.facets[fi];
      double gd = prob.dot(f, d);
      if (gd >= -kDirectionTol) continue;
      double slack = prob.dot(f, p) - f.h;
      double a = std::max(slack / -gd, 0.0);
      if (a < alpha - kDirectionTol) {
        alpha = a;
        blocker = static_cast<int>(fi);
      }
    }
    for (int j = 0; j < n; ++j) p[j] += alpha * d[j];
    if (blocker >= 0) {
      working.insert(std::lower_bound(working.begin(), working.end(), blocker), blocker);
      // Snap bound facets exactly; rows are re-centered by the next solve.
      const Facet& f = prob.facets[blocker];
      if (f.kind == Facet::Lower) p[f.index] = f.h;
      if (f.kind == Facet::Upper) p[f.index] = -f.h;
    }
  }

  res.prices = p;
  res.iterations = iter;
  if (iter >= kMaxQpIterations) {
    res.certificate = compute_certificate(prob, res, reference);
    throw NumericalFailureError("active-set projection exceeded pivot cap",
                                res.certificate.primal_residual,
                                res.certificate.stationarity_residual, res.prices);
  }
  for (std::size_t i = 0; i < working.size(); ++i) {
    const Facet& f = prob.facets[working[i]];
    double v = std::max(0.0, y(static_cast<int>(i)));
    switch (f.kind) {
      case Facet::Row:
        res.multipliers_core[f.index] = v;
        break;
      case Facet::Extra:
        res.multipliers_extra[f.index] = v;
        break;
      case Facet::Lower:
        res.multipliers_lower[f.index] = v;
        break;
      case Facet::Upper:
        res.multipliers_upper[f.index] = v;
        break;
    }
  }
  res.multipliers_nonunique = dependent;

  // Snap prices sitting essentially on a bound onto the exact bound value.
  for (int j = 0; j < n; ++j) {
    double lo = polytope.lower_bounds[j].to_double();
    if (std::abs(p[j] - lo) <= 1e-10) res.prices[j] = lo;
    if (polytope.upper_bounds[j]) {
      double hi = polytope.upper_bounds[j]->to_double();
      if (std::abs(p[j] - hi) <= 1e-10) res.prices[j] = hi;
    }
  }

  res.certificate = compute_certificate(prob, res, reference);
  double objective = 0.0;
  for (int j = 0; j < n; ++j)
    objective += (res.prices[j] - reference[j]) * (res.prices[j] - reference[j]);
  res.objective_history.push_back(objective);
  return res;
}

CoreProjection project_onto_core(const AuctionInstance& instance, const Coalition& winners,
                                 const std::map<std::string, double>& reference,
                                 const std::vector<CoreConstraint>* seed_rows) {
  instance.validate();
  Money optimal = solve_wdp(instance).welfare;
  if (!is_feasible(instance, winners) || coalition_welfare(instance, winners) != optimal)
    throw PreconditionError("winner set is not an efficient allocation");

  CorePolytope polytope = make_box_polytope(instance, winners);
  if (seed_rows)
    for (const CoreConstraint& row : *seed_rows)
      if (static_cast<int>(row.indicator.size()) == static_cast<int>(polytope.winners.size()))
        polytope.constraints.push_back(row);

  std::vector<double> ref = reference_in_order(polytope, reference);
  std::optional<WarmStart> warm;
  ProjectionResult res;
  std::vector<double> history;
  int rounds = 0;
  int total_iters = 0;

  while (true) {
    res = project_onto_polytope(polytope, ref, warm);
    total_iters += res.iterations;
    history.push_back(res.objective_history.back());

    auto violated = find_most_violated_coalition(instance, winners, price_map(polytope, res.prices));
    if (!violated) break;
    if (++rounds > kMaxSeparationRounds)
      throw NumericalFailureError("constraint generation exceeded round cap", violated->second,
                                  res.certificate.stationarity_residual, res.prices);

    CoreConstraint row = constraint_for_coalition(instance, polytope, violated->first);
    for (const CoreConstraint& existing : polytope.constraints)
      if (existing.indicator == row.indicator && existing.rhs >= row.rhs)
        throw NumericalFailureError("separation oracle returned an already-enforced constraint",
                                    violated->second, res.certificate.stationarity_residual,
                                    res.prices);

    // Restore feasibility along the segment back to the bid vector; the new
    // row is the only violated constraint, so its boundary point works as a
    // warm start with the row active.
    double at_p = 0.0, at_b = 0.0;
    for (std::size_t j = 0; j < polytope.winners.size(); ++j) {
      if (!row.indicator[j]) continue;
      at_p += res.prices[j];
      at_b += polytope.feasible_point[j];
    }
    double beta = row.rhs.to_double();
    double t = at_b > at_p ? std::clamp((beta - at_p) / (at_b - at_p), 0.0, 1.0) : 1.0;
    WarmStart ws;
    ws.start.resize(polytope.winners.size());
    for (std::size_t j = 0; j < polytope.winners.size(); ++j)
      ws.start[j] = res.prices[j] + t * (polytope.feasible_point[j] - res.prices[j]);

    polytope.constraints.push_back(row);
    ws.active_rows = {static_cast<int>(polytope.constraints.size()) - 1};
    warm = ws;
  }

  res.separation_rounds = rounds;
  res.iterations = total_iters;
  res.objective_history = history;
  return {std::move(res), std::move(polytope)};
}

bool verify_kkt(const ProjectionResult& result, const CorePolytope& polytope,
                const std::vector<double>& reference) {
  if (result.prices.size() != polytope.winners.size()) return false;
  if (result.multipliers_core.size() != polytope.constraints.size()) return false;
  if (!result.multipliers_extra.empty()) return false;  // side rows not part of the polytope
  static const std::vector<GeneralConstraint> no_extras;
  Problem prob = build_problem(polytope, no_extras);
  for (double m : result.multipliers_core)
    if (m < -kMultiplierTol) return false;
  for (double m : result.multipliers_upper)
    if (m < -kMultiplierTol) return false;
  for (double m : result.multipliers_lower)
    if (m < -kMultiplierTol) return false;
  KKTCertificate cert = compute_certificate(prob, result, reference);
  return cert.primal_residual <= kPrimalTol && cert.stationarity_residual <= kKktTol &&
         cert.comp_slack_residual <= kKktTol;
}

}  // namespace csa
