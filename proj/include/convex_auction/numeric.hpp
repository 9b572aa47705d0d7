#pragma once

#include <cstddef>
#include <vector>

namespace convex_auction {

/// Monte Carlo estimate of a mean.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Welford accumulator for mean and standard error.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  Estimate estimate() const;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double log_choose(long n, long k);

/// P(Binomial(trials, p) = k), computed in log space.
double binomial_pmf(long trials, double p, long k);

/// P(Binomial(trials, p) <= k).
double binomial_cdf(long trials, double p, long k);

/// Full pmf table of Binomial(trials, p), indices 0..trials.
std::vector<double> binomial_pmf_table(long trials, double p);

}  // namespace convex_auction
