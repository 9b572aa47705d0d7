#include "convex_auction/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace convex_auction {

Estimate RunningStats::estimate() const {
  Estimate e;
  e.mean = mean_;
  e.samples = count_;
  e.std_error = count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  return e;
}

double log_choose(long n, long k) {
  if (k < 0 || k > n) return -INFINITY;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial_pmf(long trials, double p, long k) {
  if (k < 0 || k > trials) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == trials ? 1.0 : 0.0;
  const double lp = log_choose(trials, k) + static_cast<double>(k) * std::log(p) +
                    static_cast<double>(trials - k) * std::log1p(-p);
  return std::exp(lp);
}

double binomial_cdf(long trials, double p, long k) {
  if (k < 0) return 0.0;
  if (k >= trials) return 1.0;
  double sum = 0.0;
  for (long j = 0; j <= k; ++j) sum += binomial_pmf(trials, p, j);
  return std::min(sum, 1.0);
}

std::vector<double> binomial_pmf_table(long trials, double p) {
  std::vector<double> table(static_cast<std::size_t>(trials) + 1);
  for (long k = 0; k <= trials; ++k) table[static_cast<std::size_t>(k)] = binomial_pmf(trials, p, k);
  return table;
}

}  // namespace convex_auction
