#include "convex_auction/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convex_auction/error.hpp"

namespace convex_auction {

double Outcome::revenue() const {
  return std::accumulate(payments.begin(), payments.end(), 0.0);
}

ReservePolicy ReservePolicy::fixed_quantile(double q) {
  if (!(q > 0.0 && q <= 1.0))
    throw Error(ErrorCode::BadQuantile, "quantile reserve must lie in (0, 1]");
  return ReservePolicy(Kind::fixed_quantile, q);
}

ReservePolicy ReservePolicy::fixed_value(double r) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw Error(ErrorCode::NonPositiveReserve, "reserve must be positive");
  return ReservePolicy(Kind::fixed_value, r);
}

double cost_optimized_quantile(PaymentExponent d) {
  if (d.value() <= 1.0)
    throw Error(ErrorCode::InvalidExponent, "cost-optimized reserve needs d > 1");
  return std::max(0.5, 1.0 - 1.0 / (d.value() - 1.0));
}

double resolve_reserve(const DiscreteDistribution& dist, const ReservePolicy& policy,
                       PaymentExponent d) {
  switch (policy.kind()) {
    case ReservePolicy::Kind::median: return value_at_quantile(dist, 0.5);
    case ReservePolicy::Kind::monopoly: return monopoly(dist).reserve;
    case ReservePolicy::Kind::cost_optimized:
      return value_at_quantile(dist, cost_optimized_quantile(d));
    case ReservePolicy::Kind::fixed_quantile:
      return value_at_quantile(dist, policy.parameter());
    case ReservePolicy::Kind::fixed_value: return policy.parameter();
  }
  return policy.parameter();
}

Outcome run_reserve_mechanism(std::span<const double> values, double reserve,
                              PaymentExponent d) {
  if (!(reserve > 0.0))
    throw Error(ErrorCode::NonPositiveReserve, "reserve must be positive");
  Outcome out = Outcome::empty(values.size());
  const auto winners = std::count_if(values.begin(), values.end(),
                                     [reserve](double v) { return v >= reserve; });
  if (winners == 0) return out;
  const double z = static_cast<double>(winners);
  const double price = d.inverse_cost(reserve / z);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= reserve) {
      out.allocations[i] = 1.0 / z;
      out.payments[i] = price;
    }
  }
  return out;
}

double reserve_expected_revenue(const DiscreteDistribution& dist, int n, double reserve,
                                PaymentExponent d) {
  if (!(reserve > 0.0))
    throw Error(ErrorCode::NonPositiveReserve, "reserve must be positive");
  if (n < 1) return 0.0;
  const std::size_t k = dist.lower_index(reserve);
  if (k >= dist.size()) return 0.0;
  const double q = dist.survival(k);
  double revenue = 0.0;
  for (long z = 1; z <= n; ++z) {
    const double zd = static_cast<double>(z);
    revenue += binomial_pmf(n, q, z) * zd * d.inverse_cost(reserve / zd);
  }
  return revenue;
}

Outcome run_price_setter(std::span<const double> values, std::size_t setter,
                         PaymentExponent d) {
  if (values.size() < 2)
    throw Error(ErrorCode::TooFewBidders, "price setter needs at least two bidders");
  std::vector<double> rest;
  rest.reserve(values.size() - 1);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i != setter) rest.push_back(values[i]);
  const Outcome inner = run_reserve_mechanism(rest, values[setter], d);
  Outcome out = Outcome::empty(values.size());
  for (std::size_t i = 0, j = 0; i < values.size(); ++i) {
    if (i == setter) continue;
    out.allocations[i] = inner.allocations[j];
    out.payments[i] = inner.payments[j];
    ++j;
  }
  return out;
}

Outcome run_random_price_setter(std::span<const double> values, PaymentExponent d,
                                Rng& rng) {
  if (values.size() < 2)
    throw Error(ErrorCode::TooFewBidders, "price setter needs at least two bidders");
  return run_price_setter(values, uniform_index(rng, values.size()), d);
}

double price_setter_expected_revenue(const DiscreteDistribution& dist, int n,
                                     PaymentExponent d) {
  if (n < 2) throw Error(ErrorCode::TooFewBidders, "price setter needs at least two bidders");
  double revenue = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k)
    revenue += dist.mass(k) * reserve_expected_revenue(dist, n - 1, dist.value(k), d);
  return revenue;
}

namespace {

double pseudo_surplus_power(PaymentExponent d) {
  if (d.value() <= 1.0)
    throw Error(ErrorCode::InvalidExponent, "pseudo-surplus allocation needs d > 1");
  return 1.0 / (d.value() - 1.0);
}

std::vector<double> proportional(std::span<const double> weights, double power) {
  std::vector<double> x(weights.size(), 0.0);
  // Normalize by the largest weight so large powers do not overflow.
  const double top = weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
  if (!(top > 0.0)) return x;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    x[i] = weights[i] > 0.0 ? std::pow(weights[i] / top, power) : 0.0;
    total += x[i];
  }
  for (double& xi : x) xi /= total;
  return x;
}

}  // namespace

std::vector<double> pseudo_surplus_allocation(std::span<const double> values,
                                              PaymentExponent d) {
  const double power = pseudo_surplus_power(d);
  if (std::none_of(values.begin(), values.end(), [](double v) { return v > 0.0; }))
    throw Error(ErrorCode::AllZeroValues, "pseudo-surplus allocation needs a positive value");
  return proportional(values, power);
}

std::vector<double> virtual_proportional_allocation(const DiscreteDistribution& dist,
                                                    std::span<const double> values,
                                                    PaymentExponent d) {
  const double power = pseudo_surplus_power(d);
  std::vector<double> weights(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    weights[i] = std::max(virtual_value(dist, values[i]), 0.0);
  return proportional(weights, power);
}

RankRule rank_rule(HighestKind kind) {
  return kind == HighestKind::single_highest ? RankRule::single_highest
                                             : RankRule::all_highest;
}

Outcome run_rank_mechanism(const DiscreteDistribution& dist,
                           std::span<const double> values, HighestKind kind,
                           std::optional<double> reserve, PaymentExponent d,
                           const InterimProfile& interim, Rng& rng) {
  const bool matches = interim.bidders == static_cast<int>(values.size()) &&
                       interim.rule == to_string(rank_rule(kind)) &&
                       interim.reserve == reserve && interim.exponent == d &&
                       std::equal(interim.support.begin(), interim.support.end(),
                                  dist.support().begin(), dist.support().end());
  if (!matches)
    throw Error(ErrorCode::InterimMismatch, "interim profile built for other parameters");

  Outcome out = Outcome::empty(values.size());
  std::vector<std::size_t> top;
  double best = -INFINITY;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (reserve && values[i] < *reserve) continue;
    if (values[i] > best) {
      best = values[i];
      top.assign(1, i);
    } else if (values[i] == best) {
      top.push_back(i);
    }
  }
  if (!top.empty()) {
    if (kind == HighestKind::single_highest) {
      out.allocations[top[uniform_index(rng, top.size())]] = 1.0;
    } else {
      for (std::size_t i : top) out.allocations[i] = 1.0 / static_cast<double>(top.size());
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    out.payments[i] = interim.actual_payment[dist.require_index(values[i])];
  return out;
}

double all_pay_interim_allocation(const DiscreteDistribution& dist, int n, double t) {
  const std::size_t k = dist.require_index(t);
  return interim_rank_allocation(dist, n, RankRule::top_quarter)[k];
}

std::vector<double> all_pay_bids(const DiscreteDistribution& dist, int n,
                                 PaymentExponent d) {
  const auto x = interim_rank_allocation(dist, n, RankRule::top_quarter);
  return actual_payment_table(perceived_payment_table(x, dist.support()), d);
}

double all_pay_bid(const DiscreteDistribution& dist, int n, PaymentExponent d, double t) {
  const std::size_t k = dist.require_index(t);
  return all_pay_bids(dist, n, d)[k];
}

double all_pay_expected_revenue(const DiscreteDistribution& dist, int n,
                                PaymentExponent d) {
  const auto bids = all_pay_bids(dist, n, d);
  double per_bidder = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) per_bidder += dist.mass(k) * bids[k];
  return n * per_bidder;
}

ProportionalEstimate estimate_proportional_revenue(const DiscreteDistribution& dist,
                                                   int n, ProportionalBasis basis,
                                                   PaymentExponent d,
                                                   std::size_t samples, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "need at least one bidder");
  if (samples == 0) throw Error(ErrorCode::BadConfig, "need at least one sample");
  const double power = pseudo_surplus_power(d);
  const std::size_t m = dist.size();

  std::vector<double> weight(m);
  const auto phi = basis == ProportionalBasis::virtual_value ? virtual_values(dist)
                                                             : std::vector<double>{};
  for (std::size_t k = 0; k < m; ++k) {
    const double w = basis == ProportionalBasis::value ? dist.value(k) : std::max(phi[k], 0.0);
    // Scale by the top value so powered weights stay in [0, 1].
    weight[k] = w > 0.0 ? std::pow(w / dist.max_value(), power) : 0.0;
  }

  std::vector<double> draws(samples * m);
  std::vector<double> mean(m, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    double others = 0.0;
    for (int j = 1; j < n; ++j) others += weight[dist.sample_index(rng)];
    double* row = &draws[s * m];
    for (std::size_t k = 0; k < m; ++k) {
      const double total = weight[k] + others;
      row[k] = total > 0.0 ? weight[k] / total : 0.0;
      mean[k] += row[k];
    }
  }
  for (double& x : mean) x /= static_cast<double>(samples);

  ProportionalEstimate out{
      make_interim_profile(dist.support(), mean, d, n,
                           basis == ProportionalBasis::value ? "progc_val" : "progc_virval"),
      {}};
  out.revenue.mean = profile_expected_revenue(dist, out.profile);
  out.revenue.samples = samples;

  // Revenue = n Σ_k f_k ĉ_k^(1/d) with ĉ linear in the table; linearize.
  std::vector<double> tail(m + 1, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    const double c = out.profile.perceived_payment[k];
    const double slope = c > 0.0 ? std::pow(c, 1.0 / d.value() - 1.0) / d.value() : 0.0;
    tail[k] = tail[k + 1] + dist.mass(k) * slope;
  }
  RunningStats lin;
  for (std::size_t s = 0; s < samples; ++s) {
    const double* row = &draws[s * m];
    double acc = 0.0;
    double previous = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      acc += dist.value(k) * (row[k] - previous) * tail[k];
      previous = row[k];
    }
    lin.add(n * acc);
  }
  out.revenue.std_error = lin.estimate().std_error;
  return out;
}

namespace {

// Rank rules on type indices. `eligible_from` is the first index at or above
// the reserve.
class RankExPost {
 public:
  RankExPost(const DiscreteDistribution& dist, HighestKind kind,
             std::optional<double> reserve, PaymentExponent d)
      : dist_(dist),
        kind_(kind),
        eligible_from_(reserve ? dist.lower_index(*reserve) : 0),
        d_(d) {}

  double run(std::span<const std::size_t> types, Outcome* out, Rng& rng) const {
    // Highest and second-highest eligible type with multiplicities.
    long top = -1, second = -1;
    int top_count = 0, second_count = 0;
    for (std::size_t k : types) {
      if (k < eligible_from_) continue;
      const long t = static_cast<long>(k);
      if (t > top) {
        second = top;
        second_count = top_count;
        top = t;
        top_count = 1;
      } else if (t == top) {
        ++top_count;
      } else if (t > second) {
        second = t;
        second_count = 1;
      } else if (t == second) {
        ++second_count;
      }
    }
    const std::size_t n = types.size();
    if (out) *out = Outcome::empty(n);
    if (top < 0) return 0.0;

    const double share = 1.0 / top_count;
    double revenue = 0.0;
    if (kind_ == HighestKind::all_highest) {
      const double c = perceived(top, top_count, second, second_count, top);
      const double p = d_.inverse_cost(c);
      revenue = top_count * p;
      if (out)
        for (std::size_t i = 0; i < n; ++i)
          if (static_cast<long>(types[i]) == top) {
            out->allocations[i] = share;
            out->payments[i] = p;
          }
      return revenue;
    }
    // Perceived payment over win probability `share`.
    const double c = perceived(top, top_count, second, second_count, top);
    const double p = d_.inverse_cost(c / share);
    if (out) {
      std::size_t pick = uniform_index(rng, static_cast<std::size_t>(top_count));
      for (std::size_t i = 0; i < n; ++i)
        if (static_cast<long>(types[i]) == top && pick-- == 0) {
          out->allocations[i] = 1.0;
          out->payments[i] = p;
          break;
        }
    }
    return p;
  }

 private:
  // ĉ for a bidder of type `own`, given the others' top type and count.
  double perceived(long top, int top_count, long second, int second_count, long own) const {
    long rival = top;
    int ties = top_count;
    if (own == top) {
      --ties;
      if (ties == 0) {
        rival = second;
        ties = second_count;
      }
    }
    const auto from = static_cast<long>(eligible_from_);
    if (rival < 0) return dist_.value(static_cast<std::size_t>(from));
    const double at_rival = 1.0 / (ties + 1);
    const double v = dist_.value(static_cast<std::size_t>(rival));
    if (own == rival) return v * at_rival;
    return v * at_rival + dist_.value(static_cast<std::size_t>(rival + 1)) * (1.0 - at_rival);
  }

  const DiscreteDistribution& dist_;
  HighestKind kind_;
  std::size_t eligible_from_;
  PaymentExponent d_;
};

class ProportionalExPost {
 public:
  ProportionalExPost(const DiscreteDistribution& dist, ProportionalBasis basis,
                     PaymentExponent d)
      : dist_(dist), d_(d), weight_(dist.size()) {
    const double power = pseudo_surplus_power(d);
    const auto phi = basis == ProportionalBasis::virtual_value ? virtual_values(dist)
                                                               : std::vector<double>{};
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const double w = basis == ProportionalBasis::value ? dist.value(k) : std::max(phi[k], 0.0);
      weight_[k] = w > 0.0 ? std::pow(w / dist.max_value(), power) : 0.0;
      if (k > 0 && weight_[k] < weight_[k - 1])
        throw Error(ErrorCode::NonMonotoneAllocation,
                    "proportional weights decrease in value");
    }
  }

  double run(std::span<const std::size_t> types, Outcome* out) const {
    double total = 0.0;
    for (std::size_t k : types) total += weight_[k];
    if (out) *out = Outcome::empty(types.size());
    double revenue = 0.0;
    for (std::size_t i = 0; i < types.size(); ++i) {
      const std::size_t own = types[i];
      const double others = total - weight_[own];
      double c = 0.0, previous = 0.0;
      for (std::size_t j = 0; j <= own; ++j) {
        const double sum = weight_[j] + others;
        const double x = sum > 0.0 ? weight_[j] / sum : 0.0;
        c += dist_.value(j) * (x - previous);
        previous = x;
      }
      const double p = d_.inverse_cost(c);
      revenue += p;
      if (out) {
        out->allocations[i] = previous;
        out->payments[i] = p;
      }
    }
    return revenue;
  }

 private:
  const DiscreteDistribution& dist_;
  PaymentExponent d_;
  std::vector<double> weight_;
};

std::vector<std::size_t> type_indices(const DiscreteDistribution& dist,
                                      std::span<const double> values) {
  std::vector<std::size_t> types(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) types[i] = dist.require_index(values[i]);
  return types;
}

template <class Run>
Estimate simulate_profiles(const DiscreteDistribution& dist, int n, std::size_t samples,
                           Rng& rng, Run&& run) {
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "need at least one bidder");
  RunningStats acc;
  std::vector<std::size_t> types(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& k : types) k = dist.sample_index(rng);
    acc.add(run(types));
  }
  return acc.estimate();
}

}  // namespace

Outcome run_rank_mechanism_ex_post(const DiscreteDistribution& dist,
                                   std::span<const double> values, HighestKind kind,
                                   std::optional<double> reserve, PaymentExponent d,
                                   Rng& rng) {
  Outcome out;
  RankExPost(dist, kind, reserve, d).run(type_indices(dist, values), &out, rng);
  return out;
}

Outcome run_proportional_ex_post(const DiscreteDistribution& dist,
                                 std::span<const double> values,
                                 ProportionalBasis basis, PaymentExponent d) {
  Outcome out;
  ProportionalExPost(dist, basis, d).run(type_indices(dist, values), &out);
  return out;
}

Estimate simulate_rank_ex_post(const DiscreteDistribution& dist, int n, HighestKind kind,
                               std::optional<double> reserve, PaymentExponent d,
                               std::size_t samples, Rng& rng) {
  const RankExPost rule(dist, kind, reserve, d);
  // Revenue does not depend on the tie-break draw, so no Outcome is built.
  return simulate_profiles(dist, n, samples, rng, [&](std::span<const std::size_t> types) {
    return rule.run(types, nullptr, rng);
  });
}

Estimate simulate_proportional_ex_post(const DiscreteDistribution& dist, int n,
                                       ProportionalBasis basis, PaymentExponent d,
                                       std::size_t samples, Rng& rng) {
  const ProportionalExPost rule(dist, basis, d);
  return simulate_profiles(dist, n, samples, rng, [&](std::span<const std::size_t> types) {
    return rule.run(types, nullptr);
  });
}

}  // namespace convex_auction
