#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convex_auction/distribution.hpp"
#include "convex_auction/optimal.hpp"

namespace convex_auction {

/// Mechanisms the experiment harness knows how to evaluate.
enum class Mechanism {
  prior_free,
  posted_median,
  posted_monopoly,
  highest,
  highest_monopoly,
  all_highest,
  all_highest_monopoly,
  progc_val,
  progc_virval,
  posted_cost_optimized,
  all_pay,
};

struct MechanismInfo {
  Mechanism id;
  std::string_view name;    ///< config / CLI spelling
  std::string_view column;  ///< CSV header
};

const std::vector<MechanismInfo>& mechanism_registry();
const MechanismInfo& mechanism_info(Mechanism m);
/// Throws UnknownMechanism listing the valid names.
Mechanism parse_mechanism(std::string_view name);
/// The nine mechanisms compared in the reference experiment, in column order.
std::vector<Mechanism> default_mechanisms();

/// Payment rule for the rank and proportional mechanisms. `ex_post` prices
/// every simulated profile with dominant-strategy payments; `interim` charges
/// value-only payments from the interim tables.
enum class PaymentRule { ex_post, interim };

const char* to_string(PaymentRule rule);

struct ExperimentConfig {
  std::size_t num_distributions = 50;
  std::size_t support_size = 50;
  std::vector<int> n_values;
  double d = 2.0;
  std::size_t sims_per_cell = 10000;
  std::uint64_t master_seed = 1;
  std::vector<Mechanism> mechanisms = default_mechanisms();
  PaymentRule payments = PaymentRule::ex_post;
  std::filesystem::path out_dir = "results";
  /// Worker threads; 0 picks hardware concurrency.
  unsigned threads = 0;
  /// Reuse solved programs under out_dir/cache.
  bool use_cache = true;
  SolverParams solver;
};

/// Flat `key = value` format: num_distributions, support_size, n_values
/// (comma list, `a-b` ranges allowed), d, sims, seed, mechanisms, payments,
/// out_dir, threads.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CellStats {
  double mean_revenue = 0.0;
  double mean_ratio = 0.0;
  /// Monte Carlo standard errors of the two means (0 for exact evaluators).
  double revenue_stderr = 0.0;
  double ratio_stderr = 0.0;
  /// False when the mechanism is undefined at this n (e.g. prior-free, n = 1).
  bool defined = true;
};

struct ExperimentReport {
  std::vector<int> n_values;
  std::vector<Mechanism> mechanisms;
  /// cells[mechanism][n index]
  std::vector<std::vector<CellStats>> cells;
  /// Mean optimal revenue per n.
  std::vector<double> opt_revenue;
  /// One entry per (distribution, n) cell whose solve was not certified.
  std::vector<std::string> solver_failures;
};

/// Runs every (distribution, n) cell. With `distributions` given, those
/// replace the generated ones. Output is independent of the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<DiscreteDistribution>* distributions = nullptr);

/// Generates the config's distributions from child streams of the master seed.
std::vector<DiscreteDistribution> generate_distributions(std::size_t count,
                                                         std::size_t support_size,
                                                         std::uint64_t master_seed);

/// Two CSVs, mean revenue and ratio to OPT, led by a `Num Bidders` column.
struct ReportFiles {
  std::filesystem::path revenue;
  std::filesystem::path ratio;
};
ReportFiles write_report(const ExperimentReport& report, const std::filesystem::path& dir);
void write_revenue_csv(std::ostream& out, const ExperimentReport& report);
void write_ratio_csv(std::ostream& out, const ExperimentReport& report);

/// Summary table for the largest n: method, mean revenue, ratio, guarantee.
void print_summary(std::ostream& out, const ExperimentReport& report, double d);

/// Two-point prior where highest-value-wins loses to uniform allocation.
struct AppendixARow {
  int n = 0;
  double high_probability = 0.0;
  double uniform_revenue = 0.0;
  double highest_revenue = 0.0;
  double highest_stderr = 0.0;
  double highest_exact = 0.0;
  double ratio = 0.0;
  /// 3 n^(1/4) log n.
  double highest_bound = 0.0;
};

DiscreteDistribution appendix_a_distribution(int n, double epsilon);

std::vector<AppendixARow> appendix_a_scenario(const std::vector<int>& n_values,
                                              double epsilon, double d,
                                              std::size_t sims, std::uint64_t seed);

/// Content hash of (support, pmf, n, d) used as the optimal-solution cache key.
std::string opt_cache_key(const DiscreteDistribution& dist, int n, double d);

/// Solves the program, reading and writing `cache_dir` when non-empty.
OptSolution solve_cached(const DiscreteDistribution& dist, int n, double d,
                         const SolverParams& params,
                         const std::filesystem::path& cache_dir);

}  // namespace convex_auction
