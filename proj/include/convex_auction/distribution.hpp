#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "convex_auction/rng.hpp"

namespace convex_auction {

/// Discrete prior shared by all bidders: strictly increasing positive support
/// with strictly positive masses. Immutable after construction.
///
/// Quantiles use the "at or above" convention, q(t_k) = P(V >= t_k), so a
/// reserve of t_k is met with probability exactly q(t_k). Tail probabilities
/// are kept as suffix sums so tiny upper-tail masses do not cancel.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<double> support, std::vector<double> pmf);

  std::size_t size() const { return support_.size(); }
  std::span<const double> support() const { return support_; }
  std::span<const double> pmf() const { return pmf_; }

  double value(std::size_t k) const { return support_[k]; }
  double mass(std::size_t k) const { return pmf_[k]; }
  /// F(t_k).
  double cdf(std::size_t k) const { return cdf_[k]; }
  /// F(t_{k-1}), with F(t_0) = 0.
  double cdf_below(std::size_t k) const { return k == 0 ? 0.0 : cdf_[k - 1]; }
  /// P(V >= t_k) = 1 - F(t_{k-1}).
  double survival(std::size_t k) const { return survival_[k]; }
  /// P(V > t_k) = 1 - F(t_k).
  double survival_above(std::size_t k) const {
    return k + 1 < size() ? survival_[k + 1] : 0.0;
  }
  double max_value() const { return support_.back(); }

  std::optional<std::size_t> index_of(double t) const;
  /// Index of t; throws ValueNotInSupport.
  std::size_t require_index(double t) const;

  /// Index of the first support value >= x, or size() if none.
  std::size_t lower_index(double x) const;

  /// Inverse-CDF draw.
  double sample(Rng& rng) const { return support_[sample_index(rng)]; }
  std::size_t sample_index(Rng& rng) const;

  double mean() const;

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  std::vector<double> support_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> survival_;
};

struct DistStats {
  double mean = 0.0;
  double median = 0.0;
  double monopoly_quantile = 0.0;
  double monopoly_reserve = 0.0;
  double max_value = 0.0;
};

struct Monopoly {
  double quantile = 0.0;
  double reserve = 0.0;
};

/// Validating constructor. Renormalizes when the mass sum deviates from one
/// by less than 1e-9.
DiscreteDistribution make_distribution(std::vector<double> support,
                                       std::vector<double> pmf);

double quantile_of(const DiscreteDistribution& dist, double t);
double value_at_quantile(const DiscreteDistribution& dist, double q);
double revenue_at(const DiscreteDistribution& dist, double t);
Monopoly monopoly(const DiscreteDistribution& dist);
double virtual_value(const DiscreteDistribution& dist, double t);

/// Per-index tables.
std::vector<double> virtual_values(const DiscreteDistribution& dist);
std::vector<double> hazard_rates(const DiscreteDistribution& dist);

bool is_mhr(const DiscreteDistribution& dist);
bool is_regular(const DiscreteDistribution& dist);

DistStats stats(const DiscreteDistribution& dist);

/// Random distribution on {1, ..., m} with non-decreasing hazard rate:
/// sorted uniform hazards, last hazard forced to one.
DiscreteDistribution gen_random_mhr(std::size_t m, Rng& rng);

std::vector<double> sample_values(const DiscreteDistribution& dist,
                                  std::size_t n, Rng& rng);

/// Text format: one `value,probability` line per support point, `#` comments.
DiscreteDistribution read_distribution(std::istream& in);
DiscreteDistribution load_distribution(const std::filesystem::path& path);
void write_distribution(std::ostream& out, const DiscreteDistribution& dist);
void save_distribution(const std::filesystem::path& path,
                       const DiscreteDistribution& dist);

}  // namespace convex_auction
