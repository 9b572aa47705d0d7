#pragma once

#include <optional>

namespace convex_auction {

enum class GuaranteeKind {
  prior_free,
  median_reserve,
  monopoly_reserve,
  cost_optimized,
  all_pay,
  single_bidder_median,
  opt_ub_mean,
  opt_ub_mhr,
};

const char* to_string(GuaranteeKind kind);

/// Free symbols of the guarantee formulas. Ratio kinds need d >= 2, except
/// single_bidder_median (any convex payment). `bidders_limit` evaluates the
/// n -> infinity limit instead of a finite n.
struct GuaranteeRequest {
  GuaranteeKind kind = GuaranteeKind::median_reserve;
  std::optional<long> bidders;
  bool bidders_limit = false;
  std::optional<double> exponent;
  std::optional<double> mean;
  std::optional<double> median;
  /// F(η), the probability of a value strictly below the monopoly reserve.
  std::optional<double> cdf_at_monopoly;
  std::optional<double> max_value;
};

struct Guarantee {
  double value = 0.0;
  /// False when the regime condition of the bound fails (all_pay's
  /// n >= 32 log(16 v̄/κ)); the value is still reported.
  bool precondition_met = true;
};

/// Approximation ratio floor (ratio kinds) or OPT upper bound (opt_ub_*).
Guarantee guarantee(const GuaranteeRequest& request);

}  // namespace convex_auction
