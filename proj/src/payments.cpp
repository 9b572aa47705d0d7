#include "convex_auction/payments.hpp"

#include <algorithm>
#include <cmath>

#include "convex_auction/error.hpp"

namespace convex_auction {

namespace {

constexpr double kMonotoneTolerance = 1e-12;

// Σ_{j=0}^{n-1} C(n-1, j) / (j+1) · below^(n-1-j) · tied^j: the chance that a
// bidder wins a uniform tie-break among the top-value bidders when every
// opponent is at or below its type.
double highest_wins_probability(int n, double below, double tied) {
  const long others = n - 1;
  if (below <= 0.0) return std::pow(tied, static_cast<double>(others)) / n;
  const double log_below = std::log(below);
  const double log_tied = std::log(tied);
  std::vector<double> logs(static_cast<std::size_t>(others) + 1);
  double peak = -INFINITY;
  for (long j = 0; j <= others; ++j) {
    const double l = log_choose(others, j) - std::log(static_cast<double>(j) + 1.0) +
                     static_cast<double>(others - j) * log_below +
                     static_cast<double>(j) * log_tied;
    logs[static_cast<std::size_t>(j)] = l;
    peak = std::max(peak, l);
  }
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - peak);
  return std::exp(peak) * sum;
}

}  // namespace

const char* to_string(RankRule rule) {
  switch (rule) {
    case RankRule::single_highest: return "single_highest";
    case RankRule::all_highest: return "all_highest";
    case RankRule::top_quarter: return "top_quarter";
  }
  return "unknown";
}

std::vector<double> interim_rank_allocation(const DiscreteDistribution& dist, int n,
                                            RankRule rule,
                                            std::optional<double> reserve) {
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "need at least one bidder");
  if (rule == RankRule::top_quarter && (n < 4 || n % 4 != 0))
    throw Error(ErrorCode::BadBidderCount, "top-quarter rule needs n divisible by 4");

  std::vector<double> x(dist.size(), 0.0);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (reserve && dist.value(k) < *reserve) continue;
    switch (rule) {
      case RankRule::single_highest:
      case RankRule::all_highest:
        // Both rules give a top-value bidder 1/(ties+1) in expectation.
        x[k] = highest_wins_probability(n, dist.cdf_below(k), dist.mass(k));
        break;
      case RankRule::top_quarter:
        x[k] = 4.0 / n * binomial_cdf(n - 1, dist.survival(k), n / 4 - 1);
        break;
    }
  }
  return x;
}

Estimate interim_allocation_mc(const DiscreteDistribution& dist, int n,
                               const AllocationRule& rule, double t,
                               std::size_t samples, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "need at least one bidder");
  RunningStats acc;
  std::vector<double> profile(static_cast<std::size_t>(n));
  profile[0] = t;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 1; i < profile.size(); ++i) profile[i] = dist.sample(rng);
    acc.add(rule(profile).at(0));
  }
  return acc.estimate();
}

std::vector<double> perceived_payment_table(std::span<const double> allocation,
                                            std::span<const double> support) {
  if (allocation.size() != support.size())
    throw Error(ErrorCode::LengthMismatch, "allocation and support lengths differ");
  std::vector<double> c(allocation.size());
  double previous = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < allocation.size(); ++k) {
    double step = allocation[k] - previous;
    if (step < -kMonotoneTolerance)
      throw Error(ErrorCode::NonMonotoneAllocation,
                  "interim allocation decreases at type index " + std::to_string(k));
    step = std::max(step, 0.0);
    acc += support[k] * step;
    c[k] = acc;
    previous = allocation[k];
  }
  return c;
}

std::vector<double> actual_payment_table(std::span<const double> perceived,
                                         PaymentExponent d) {
  std::vector<double> h(perceived.size());
  for (std::size_t k = 0; k < perceived.size(); ++k) h[k] = d.inverse_cost(perceived[k]);
  return h;
}

InterimProfile make_interim_profile(std::span<const double> support,
                                    std::span<const double> allocation,
                                    PaymentExponent d, int n, std::string rule,
                                    std::optional<double> reserve) {
  InterimProfile p;
  p.support.assign(support.begin(), support.end());
  p.allocation.assign(allocation.begin(), allocation.end());
  p.perceived_payment = perceived_payment_table(allocation, support);
  p.actual_payment = actual_payment_table(p.perceived_payment, d);
  p.exponent = d;
  p.bidders = n;
  p.rule = std::move(rule);
  p.reserve = reserve;
  return p;
}

InterimProfile rank_profile(const DiscreteDistribution& dist, int n, RankRule rule,
                            std::optional<double> reserve, PaymentExponent d) {
  const auto x = interim_rank_allocation(dist, n, rule, reserve);
  return make_interim_profile(dist.support(), x, d, n, to_string(rule), reserve);
}

BicReport bic_check(const InterimProfile& profile, double tolerance) {
  const auto& t = profile.support;
  const auto& x = profile.allocation;
  const auto& c = profile.perceived_payment;
  BicReport report;
  report.worst_violation = -INFINITY;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double truthful = t[i] * x[i] - c[i];
    if (-truthful > report.worst_violation) {
      report.worst_violation = -truthful;
      report.type_index = i;
      report.deviation_index.reset();
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j == i) continue;
      const double gain = (t[i] * x[j] - c[j]) - truthful;
      if (gain > report.worst_violation) {
        report.worst_violation = gain;
        report.type_index = i;
        report.deviation_index = j;
      }
    }
  }
  report.ok = report.worst_violation <= tolerance;
  return report;
}

double profile_expected_revenue(const DiscreteDistribution& dist,
                                const InterimProfile& profile) {
  if (profile.actual_payment.size() != dist.size())
    throw Error(ErrorCode::InterimMismatch, "profile built for a different support");
  double per_bidder = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k)
    per_bidder += dist.mass(k) * profile.actual_payment[k];
  return profile.bidders * per_bidder;
}

}  // namespace convex_auction
