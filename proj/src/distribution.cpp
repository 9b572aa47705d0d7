#include "convex_auction/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "convex_auction/error.hpp"

namespace convex_auction {

namespace {

constexpr double kMassSumTolerance = 1e-9;
constexpr double kProbabilityTolerance = 1e-12;
constexpr double kRevenueTolerance = 1e-9;

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> support,
                                           std::vector<double> pmf)
    : support_(std::move(support)), pmf_(std::move(pmf)) {
  if (support_.size() != pmf_.size())
    throw Error(ErrorCode::LengthMismatch, "support and pmf lengths differ");
  if (support_.empty())
    throw Error(ErrorCode::LengthMismatch, "empty support");
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (!std::isfinite(support_[k]) || support_[k] <= 0.0)
      throw Error(ErrorCode::NonIncreasingSupport, "support values must be positive");
    if (k > 0 && !(support_[k] > support_[k - 1]))
      throw Error(ErrorCode::NonIncreasingSupport, "support must be strictly increasing");
    if (!std::isfinite(pmf_[k]) || pmf_[k] <= 0.0)
      throw Error(ErrorCode::NonPositiveMass, "probability masses must be positive");
  }
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(total - 1.0) >= kMassSumTolerance)
    throw Error(ErrorCode::MassSumOutOfRange, "masses sum to " + std::to_string(total));
  for (double& p : pmf_) p /= total;

  const std::size_t m = support_.size();
  cdf_.resize(m);
  survival_.resize(m);
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    acc += pmf_[k];
    cdf_[k] = acc;
  }
  cdf_.back() = 1.0;
  acc = 0.0;
  for (std::size_t k = m; k-- > 0;) {
    acc += pmf_[k];
    survival_[k] = acc;
  }
  survival_.front() = 1.0;
}

std::optional<std::size_t> DiscreteDistribution::index_of(double t) const {
  const std::size_t k = lower_index(t - 1e-12 * std::max(1.0, std::abs(t)));
  if (k < size() && std::abs(support_[k] - t) <= 1e-12 * std::max(1.0, std::abs(t)))
    return k;
  return std::nullopt;
}

std::size_t DiscreteDistribution::require_index(double t) const {
  if (auto k = index_of(t)) return *k;
  throw Error(ErrorCode::ValueNotInSupport, "value " + std::to_string(t) + " not in support");
}

std::size_t DiscreteDistribution::lower_index(double x) const {
  return static_cast<std::size_t>(
      std::lower_bound(support_.begin(), support_.end(), x) - support_.begin());
}

std::size_t DiscreteDistribution::sample_index(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), size() - 1);
}

double DiscreteDistribution::mean() const {
  double mu = 0.0;
  for (std::size_t k = 0; k < size(); ++k) mu += support_[k] * pmf_[k];
  return mu;
}

DiscreteDistribution make_distribution(std::vector<double> support,
                                       std::vector<double> pmf) {
  return DiscreteDistribution(std::move(support), std::move(pmf));
}

double quantile_of(const DiscreteDistribution& dist, double t) {
  return dist.survival(dist.require_index(t));
}

double value_at_quantile(const DiscreteDistribution& dist, double q) {
  if (!(q > 0.0) || q > 1.0 + kProbabilityTolerance)
    throw Error(ErrorCode::BadQuantile, "quantile must lie in (0, 1]");
  // survival is non-increasing; find the last index still at or above q.
  // The tolerance is relative so tail types with tiny masses stay distinct.
  const double threshold = q * (1.0 - kProbabilityTolerance);
  std::size_t best = 0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist.survival(k) >= threshold)
      best = k;
    else
      break;
  }
  return dist.value(best);
}

double revenue_at(const DiscreteDistribution& dist, double t) {
  const std::size_t k = dist.require_index(t);
  return dist.value(k) * dist.survival(k);
}

Monopoly monopoly(const DiscreteDistribution& dist) {
  std::size_t best = 0;
  double best_revenue = dist.value(0) * dist.survival(0);
  for (std::size_t k = 1; k < dist.size(); ++k) {
    const double r = dist.value(k) * dist.survival(k);
    if (r > best_revenue + kRevenueTolerance) {
      best = k;
      best_revenue = r;
    }
  }
  return {dist.survival(best), dist.value(best)};
}

double virtual_value(const DiscreteDistribution& dist, double t) {
  const std::size_t k = dist.require_index(t);
  return dist.value(k) - dist.survival_above(k) / dist.mass(k);
}

std::vector<double> virtual_values(const DiscreteDistribution& dist) {
  std::vector<double> phi(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k)
    phi[k] = dist.value(k) - dist.survival_above(k) / dist.mass(k);
  return phi;
}

std::vector<double> hazard_rates(const DiscreteDistribution& dist) {
  std::vector<double> h(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) h[k] = dist.mass(k) / dist.survival(k);
  h.back() = 1.0;
  return h;
}

bool is_mhr(const DiscreteDistribution& dist) {
  const auto h = hazard_rates(dist);
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k] < h[k - 1] - kProbabilityTolerance) return false;
  return true;
}

bool is_regular(const DiscreteDistribution& dist) {
  const auto phi = virtual_values(dist);
  for (std::size_t k = 1; k < phi.size(); ++k)
    if (phi[k] < phi[k - 1] - kRevenueTolerance) return false;
  return true;
}

DistStats stats(const DiscreteDistribution& dist) {
  const Monopoly mono = monopoly(dist);
  DistStats s;
  s.mean = dist.mean();
  s.median = value_at_quantile(dist, 0.5);
  s.monopoly_quantile = mono.quantile;
  s.monopoly_reserve = mono.reserve;
  s.max_value = dist.max_value();
  return s;
}

DiscreteDistribution gen_random_mhr(std::size_t m, Rng& rng) {
  if (m == 0) throw Error(ErrorCode::LengthMismatch, "support size must be >= 1");
  std::vector<double> hazard(m);
  for (double& h : hazard) h = uniform_open01(rng);
  std::sort(hazard.begin(), hazard.end());
  hazard.back() = 1.0;

  std::vector<double> support(m), pmf(m);
  double alive = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    support[k] = static_cast<double>(k + 1);
    pmf[k] = hazard[k] * alive;
    alive *= 1.0 - hazard[k];
  }
  return DiscreteDistribution(std::move(support), std::move(pmf));
}

std::vector<double> sample_values(const DiscreteDistribution& dist, std::size_t n,
                                  Rng& rng) {
  std::vector<double> out(n);
  for (double& v : out) v = dist.sample(rng);
  return out;
}

DiscreteDistribution read_distribution(std::istream& in) {
  std::vector<double> support, pmf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::IoFailure, "line " + std::to_string(line_no) + ": expected value,probability");
    try {
      support.push_back(std::stod(line.substr(0, comma)));
      pmf.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::IoFailure, "line " + std::to_string(line_no) + ": bad number");
    }
  }
  return make_distribution(std::move(support), std::move(pmf));
}

DiscreteDistribution load_distribution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_distribution(in);
}

void write_distribution(std::ostream& out, const DiscreteDistribution& dist) {
  out << "# value,probability\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < dist.size(); ++k)
    out << dist.value(k) << ',' << dist.mass(k) << '\n';
  out.precision(old);
}

void save_distribution(const std::filesystem::path& path,
                       const DiscreteDistribution& dist) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_distribution(out, dist);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace convex_auction
