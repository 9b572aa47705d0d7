#include "convex_auction/bounds.hpp"

#include <cmath>
#include <numbers>

#include "convex_auction/error.hpp"

namespace convex_auction {

namespace {

using std::numbers::e;

template <typename T>
T need(const std::optional<T>& field, const char* name) {
  if (!field) throw Error(ErrorCode::MissingParameter, std::string("missing ") + name);
  return *field;
}

double exponent_at_least(const GuaranteeRequest& r, double floor) {
  const double d = need(r.exponent, "exponent");
  if (d < floor)
    throw Error(ErrorCode::ExponentTooSmall,
                std::string(to_string(r.kind)) + " guarantee needs d >= " +
                    std::to_string(floor));
  return d;
}

// n/(n+1)-style factors; in the limit both sides of the fraction grow.
double bidders_of(const GuaranteeRequest& r) {
  if (r.bidders_limit) return INFINITY;
  const long n = need(r.bidders, "bidders");
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "bidders must be >= 1");
  return static_cast<double>(n);
}

double ratio(double n, double plus, double minus) {
  // (n + minus) / (n + plus), equal to 1 in the limit
  return std::isinf(n) ? 1.0 : (n + minus) / (n + plus);
}

}  // namespace

const char* to_string(GuaranteeKind kind) {
  switch (kind) {
    case GuaranteeKind::prior_free: return "prior_free";
    case GuaranteeKind::median_reserve: return "median_reserve";
    case GuaranteeKind::monopoly_reserve: return "monopoly_reserve";
    case GuaranteeKind::cost_optimized: return "cost_optimized";
    case GuaranteeKind::all_pay: return "all_pay";
    case GuaranteeKind::single_bidder_median: return "single_bidder_median";
    case GuaranteeKind::opt_ub_mean: return "opt_ub_mean";
    case GuaranteeKind::opt_ub_mhr: return "opt_ub_mhr";
  }
  return "unknown";
}

Guarantee guarantee(const GuaranteeRequest& r) {
  switch (r.kind) {
    case GuaranteeKind::prior_free: {
      const double d = exponent_at_least(r, 2.0);
      const double n = bidders_of(r);
      if (n < 2.0) throw Error(ErrorCode::BadBidderCount, "prior-free needs n >= 2");
      return {0.125 * std::pow(ratio(n, 0.0, -1.0), 1.0 - 1.0 / d) / std::pow(e, 1.0 / d)};
    }
    case GuaranteeKind::median_reserve: {
      const double d = exponent_at_least(r, 2.0);
      const double n = bidders_of(r);
      return {0.5 * std::pow(2.0 / e * ratio(n, 1.0, 0.0), 1.0 / d)};
    }
    case GuaranteeKind::monopoly_reserve: {
      const double d = exponent_at_least(r, 2.0);
      const double n = bidders_of(r);
      const double q = 1.0 - need(r.cdf_at_monopoly, "cdf_at_monopoly");
      // n q^(d-1) / (1 + (n-1) q), written to survive n -> infinity.
      const double share = std::isinf(n) ? std::pow(q, d - 2.0)
                                         : n * std::pow(q, d - 1.0) / (1.0 + (n - 1.0) * q);
      return {std::pow(share / e, 1.0 / d)};
    }
    case GuaranteeKind::cost_optimized: {
      const double d = exponent_at_least(r, 2.0);
      const double n = bidders_of(r);
      const double lead = std::pow(ratio(n, 1.0, 0.0), 1.0 / d);
      if (d < 3.0) return {lead / (2.0 * std::sqrt(e))};
      return {lead / std::pow(4.0 * e * (d - 2.0), 1.0 / d)};
    }
    case GuaranteeKind::all_pay: {
      exponent_at_least(r, 2.0);
      const double n = bidders_of(r);
      const double kappa = need(r.median, "median");
      const double top = need(r.max_value, "max_value");
      return {1.0 / 16.0, n >= 32.0 * std::log(16.0 * top / kappa)};
    }
    case GuaranteeKind::single_bidder_median:
      exponent_at_least(r, 1.0);
      return {0.5};
    case GuaranteeKind::opt_ub_mean: {
      const double d = exponent_at_least(r, 2.0);
      const double n = static_cast<double>(need(r.bidders, "bidders"));
      return {n * std::pow(need(r.mean, "mean") / n, 1.0 / d)};
    }
    case GuaranteeKind::opt_ub_mhr: {
      const double d = exponent_at_least(r, 2.0);
      const double n = static_cast<double>(need(r.bidders, "bidders"));
      return {n * std::pow(e * need(r.median, "median") / n, 1.0 / d)};
    }
  }
  throw Error(ErrorCode::MissingParameter, "unknown guarantee kind");
}

}  // namespace convex_auction
