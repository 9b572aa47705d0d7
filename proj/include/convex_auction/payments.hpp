#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convex_auction/distribution.hpp"
#include "convex_auction/exponent.hpp"
#include "convex_auction/numeric.hpp"
#include "convex_auction/rng.hpp"

namespace convex_auction {

/// Rank-based allocation rules with exact interim allocations.
enum class RankRule {
  single_highest,  ///< one top-value bidder, ties broken uniformly at random
  all_highest,     ///< all top-value bidders split the good evenly
  top_quarter,     ///< 4/n to each bidder among the n/4 highest
};

const char* to_string(RankRule rule);

/// Per-type interim tables for a symmetric mechanism: allocation x̂(t),
/// perceived payment ĉ(t) from the discrete payment identity, and actual
/// payment h(t) = ĉ(t)^(1/d).
struct InterimProfile {
  std::vector<double> support;
  std::vector<double> allocation;
  std::vector<double> perceived_payment;
  std::vector<double> actual_payment;
  PaymentExponent exponent{1.0};
  int bidders = 1;
  std::string rule;
  std::optional<double> reserve;
};

/// Exact interim allocation for each support type. Types strictly below the
/// reserve get zero.
std::vector<double> interim_rank_allocation(const DiscreteDistribution& dist, int n,
                                            RankRule rule,
                                            std::optional<double> reserve = std::nullopt);

/// Allocation rule over a full value profile; the estimate concerns bidder 0.
using AllocationRule = std::function<std::vector<double>(std::span<const double>)>;

/// Monte Carlo interim allocation of bidder 0 holding type t, averaging the
/// rule over `samples` draws of the other n-1 values.
Estimate interim_allocation_mc(const DiscreteDistribution& dist, int n,
                               const AllocationRule& rule, double t,
                               std::size_t samples, Rng& rng);

/// ĉ(t_k) = Σ_{j<=k} t_j (x̂(t_j) - x̂(t_{j-1})), x̂(t_0) = 0.
/// Throws NonMonotoneAllocation when x̂ decreases.
std::vector<double> perceived_payment_table(std::span<const double> allocation,
                                            std::span<const double> support);

/// h(t) = ĉ(t)^(1/d).
std::vector<double> actual_payment_table(std::span<const double> perceived,
                                         PaymentExponent d);

/// Builds the full profile from an interim allocation table.
InterimProfile make_interim_profile(std::span<const double> support,
                                    std::span<const double> allocation,
                                    PaymentExponent d, int n, std::string rule,
                                    std::optional<double> reserve = std::nullopt);

/// Exact interim profile of a rank rule.
InterimProfile rank_profile(const DiscreteDistribution& dist, int n, RankRule rule,
                            std::optional<double> reserve, PaymentExponent d);

struct BicReport {
  bool ok = true;
  /// Largest amount by which a deviation (or non-participation) beats
  /// truth-telling; <= 0 when the profile is BIC and IIR.
  double worst_violation = 0.0;
  std::size_t type_index = 0;
  std::optional<std::size_t> deviation_index;  ///< empty: IR violation
};

BicReport bic_check(const InterimProfile& profile, double tolerance = 1e-9);

/// n Σ_t f(t) h(t): expected revenue of a mechanism charging value-only
/// payments from the profile.
double profile_expected_revenue(const DiscreteDistribution& dist,
                                const InterimProfile& profile);

}  // namespace convex_auction
