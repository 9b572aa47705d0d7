#pragma once

#include <cmath>

#include "convex_auction/error.hpp"

namespace convex_auction {

/// Exponent d of the power payment function c(p) = p^d, d >= 1.
class PaymentExponent {
 public:
  explicit PaymentExponent(double d) : d_(d) {
    if (!std::isfinite(d) || d < 1.0)
      throw Error(ErrorCode::InvalidExponent, "payment exponent must be >= 1");
  }

  double value() const { return d_; }

  /// Perceived cost of paying p.
  double cost(double payment) const { return std::pow(payment, d_); }

  /// Actual payment whose perceived cost is c.
  double inverse_cost(double perceived) const {
    return perceived <= 0.0 ? 0.0 : std::pow(perceived, 1.0 / d_);
  }

  bool operator==(const PaymentExponent&) const = default;

 private:
  double d_;
};

}  // namespace convex_auction
