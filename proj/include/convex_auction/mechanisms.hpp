#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "convex_auction/distribution.hpp"
#include "convex_auction/exponent.hpp"
#include "convex_auction/numeric.hpp"
#include "convex_auction/payments.hpp"
#include "convex_auction/rng.hpp"

namespace convex_auction {

/// Result of one auction run.
struct Outcome {
  std::vector<double> allocations;
  std::vector<double> payments;

  double revenue() const;
  std::size_t bidders() const { return allocations.size(); }

  static Outcome empty(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  }
};

class ReservePolicy {
 public:
  enum class Kind { median, monopoly, cost_optimized, fixed_quantile, fixed_value };

  static ReservePolicy median() { return ReservePolicy(Kind::median, 0.0); }
  static ReservePolicy monopoly() { return ReservePolicy(Kind::monopoly, 0.0); }
  static ReservePolicy cost_optimized() { return ReservePolicy(Kind::cost_optimized, 0.0); }
  /// q in (0, 1].
  static ReservePolicy fixed_quantile(double q);
  /// r > 0.
  static ReservePolicy fixed_value(double r);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }

 private:
  ReservePolicy(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Quantile reserve max{1/2, 1 - 1/(d-1)} used by the cost-optimized policy.
double cost_optimized_quantile(PaymentExponent d);

double resolve_reserve(const DiscreteDistribution& dist, const ReservePolicy& policy,
                       PaymentExponent d);

/// Uniform allocation among bidders at or above the reserve; each of the Z
/// winners pays (reserve / Z)^(1/d).
Outcome run_reserve_mechanism(std::span<const double> values, double reserve,
                              PaymentExponent d);

/// Exact expected revenue of run_reserve_mechanism with n i.i.d. bidders, by
/// enumeration over Z ~ Binomial(n, P(V >= reserve)).
double reserve_expected_revenue(const DiscreteDistribution& dist, int n, double reserve,
                                PaymentExponent d);

/// Bidder `setter` is sacrificed as the reserve; the others run the reserve
/// mechanism against its value.
Outcome run_price_setter(std::span<const double> values, std::size_t setter,
                         PaymentExponent d);

/// Random price setter: the sacrificed bidder is drawn uniformly.
Outcome run_random_price_setter(std::span<const double> values, PaymentExponent d,
                                Rng& rng);

/// Exact expected revenue of the random price setter (setter value drawn
/// from the prior, n-1 remaining bidders).
double price_setter_expected_revenue(const DiscreteDistribution& dist, int n,
                                     PaymentExponent d);

/// x_i = v_i^(1/(d-1)) / Σ_j v_j^(1/(d-1)).
std::vector<double> pseudo_surplus_allocation(std::span<const double> values,
                                              PaymentExponent d);

/// Pseudo-surplus allocation fed clamped virtual values max{φ(v), 0}.
std::vector<double> virtual_proportional_allocation(const DiscreteDistribution& dist,
                                                    std::span<const double> values,
                                                    PaymentExponent d);

enum class HighestKind { single_highest, all_highest };

RankRule rank_rule(HighestKind kind);

/// Highest-value mechanism charging the value-only payments h(v_i) of the
/// matching exact interim profile.
Outcome run_rank_mechanism(const DiscreteDistribution& dist,
                           std::span<const double> values, HighestKind kind,
                           std::optional<double> reserve, PaymentExponent d,
                           const InterimProfile& interim, Rng& rng);

/// (4/n) P(Binomial(n-1, q(t)) <= n/4 - 1).
double all_pay_interim_allocation(const DiscreteDistribution& dist, int n, double t);

/// Equilibrium bid table of the top-quarter all-pay auction, per type index.
std::vector<double> all_pay_bids(const DiscreteDistribution& dist, int n,
                                 PaymentExponent d);

double all_pay_bid(const DiscreteDistribution& dist, int n, PaymentExponent d, double t);

/// n Σ_t f(t) b(t).
double all_pay_expected_revenue(const DiscreteDistribution& dist, int n,
                                PaymentExponent d);

/// Basis for the proportional mechanisms.
enum class ProportionalBasis { value, virtual_value };

/// Monte Carlo revenue of a proportional (pseudo-surplus) mechanism with
/// value-only payments from its interim profile. The interim allocation of
/// every type is estimated on common draws of the opponents, which keeps the
/// estimated table monotone whenever the weights are. The standard error is
/// a delta-method linearization of the revenue around the estimated table.
struct ProportionalEstimate {
  InterimProfile profile;
  Estimate revenue;
};

ProportionalEstimate estimate_proportional_revenue(const DiscreteDistribution& dist,
                                                   int n, ProportionalBasis basis,
                                                   PaymentExponent d,
                                                   std::size_t samples, Rng& rng);


/// Ex-post payments. With the other values fixed, a bidder's allocation as a
/// function of its own report on the support grid is priced by the discrete
/// payment identity; the bidder pays c^{-1} of that perceived payment. Under
/// single_highest only the realized winner pays, (ĉ / x)^(1/d) with x its win
/// probability before the tie-break, so perceived payments match in
/// expectation. Values must be support points.
Outcome run_rank_mechanism_ex_post(const DiscreteDistribution& dist,
                                   std::span<const double> values, HighestKind kind,
                                   std::optional<double> reserve, PaymentExponent d,
                                   Rng& rng);
/// Throws NonMonotoneAllocation when the basis weights decrease in value.
Outcome run_proportional_ex_post(const DiscreteDistribution& dist,
                                 std::span<const double> values,
                                 ProportionalBasis basis, PaymentExponent d);

/// Monte Carlo revenue of the ex-post rules over `samples` i.i.d. profiles.
Estimate simulate_rank_ex_post(const DiscreteDistribution& dist, int n, HighestKind kind,
                               std::optional<double> reserve, PaymentExponent d,
                               std::size_t samples, Rng& rng);
Estimate simulate_proportional_ex_post(const DiscreteDistribution& dist, int n,
                                       ProportionalBasis basis, PaymentExponent d,
                                       std::size_t samples, Rng& rng);

}  // namespace convex_auction
