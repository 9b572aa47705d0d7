// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "convex_auction/bounds.hpp"
#include "convex_auction/mechanisms.hpp"
#include "convex_auction/optimal.hpp"
#include "convex_auction/payments.hpp"
#include "convex_auction/sim.hpp"
#include "oracles.hpp"

using namespace convex_auction;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double guarantee_of(GuaranteeKind kind, int n, double d) {
  GuaranteeRequest r;
  r.kind = kind;
  r.bidders = n;
  r.exponent = d;
  return guarantee(r).value;
}

// Ten generated MHR distributions on {1..20}, shared by criteria 3 and 4.
const std::vector<DiscreteDistribution>& grid_distributions() {
  static const auto dists = generate_distributions(10, 20, kSeed);
  return dists;
}

// Scaled experiment shared by criteria 6 and 10.
struct ScaledRuns {
  ExperimentReport serial, parallel;
  std::string serial_revenue, serial_ratio, parallel_revenue, parallel_ratio;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const ScaledRuns& scaled_runs() {
  static const ScaledRuns runs = [] {
    ExperimentConfig c;
    c.num_distributions = 10;
    c.support_size = 20;
    c.n_values.clear();
    for (int n = 1; n <= 10; ++n) c.n_values.push_back(n);
    c.sims_per_cell = 2000;
    c.d = 2.0;
    c.master_seed = kSeed;
    c.use_cache = false;
    const fs::path root = fs::temp_directory_path() / "cvx_acceptance";
    fs::remove_all(root);

    ScaledRuns r;
    c.threads = 1;
    r.serial = run_experiment(c);
    const auto a = write_report(r.serial, root / "serial");
    c.threads = std::max(4u, std::thread::hardware_concurrency());
    r.parallel = run_experiment(c);
    const auto b = write_report(r.parallel, root / "parallel");
    r.serial_revenue = slurp(a.revenue);
    r.serial_ratio = slurp(a.ratio);
    r.parallel_revenue = slurp(b.revenue);
    r.parallel_ratio = slurp(b.ratio);
    return r;
  }();
  return runs;
}

Verdict criterion_solver_oracle() {
  Verdict v;
  Rng rng(child_seed(kSeed, {hash_label("oracle-instances")}));
  const double step = 1e-3;
  double worst = 0.0;
  int instances = 0;
  for (int rep = 0; rep < 2; ++rep)
    for (std::size_t m = 1; m <= 3; ++m)
      for (int n = 1; n <= 3; ++n)
        for (double d : {2.0, 3.0}) {
          if (rep == 1 && m < 3) continue;
          std::vector<double> support(m), pmf(m);
          double t = 0.0, total = 0.0;
          for (std::size_t k = 0; k < m; ++k) {
            support[k] = (t += 0.5 + 2.0 * uniform01(rng));
            total += (pmf[k] = 0.05 + uniform01(rng));
          }
          for (double& p : pmf) p /= total;
          const auto dist = make_distribution(support, pmf);
          const PaymentExponent exp(d);
          const auto sol = solve_optimal(build_program(dist, n, exp));
          const double brute = brute_force_optimal(dist, n, exp, step);
          const double rel = std::abs(sol.total_revenue - brute) / dist.max_value();
          worst = std::max(worst, rel);
          if (!sol.converged || rel > 5e-3) v.pass = false;
          ++instances;
        }
  v.pass = v.pass && instances >= 20;
  v.detail = std::to_string(instances) + " instances, worst |OPT - grid|/v_max = " + fmt(worst, 3) +
             " (limit 5e-3)";
  return v;
}

Verdict criterion_hand_solved() {
  Verdict v;
  const PaymentExponent two(2.0);
  const auto point = make_distribution({1}, {1});
  const auto uniform = make_distribution({1, 2}, {0.5, 0.5});
  const double opt_point = solve_optimal(build_program(point, 1, two)).total_revenue;
  const double opt_uniform = solve_optimal(build_program(uniform, 1, two)).total_revenue;
  const double median = reserve_expected_revenue(
      uniform, 1, resolve_reserve(uniform, ReservePolicy::median(), two), two);
  const double ratio = median / opt_uniform;
  v.pass = std::abs(opt_point - 1.0) <= 1e-6 && std::abs(opt_uniform - 1.0) <= 1e-6 &&
           std::abs(median - 0.5 * std::sqrt(2.0)) <= 1e-9 && ratio >= 0.5;
  v.detail = "point OPT " + fmt(opt_point, 10) + ", uniform OPT " + fmt(opt_uniform, 10) +
             ", posted median " + fmt(median, 10) + ", ratio " + fmt(ratio, 6);
  return v;
}

Verdict criterion_sandwich() {
  Verdict v;
  double worst_mean = std::numeric_limits<double>::infinity(), worst_median = worst_mean;
  int cells = 0;
  for (const auto& dist : grid_distributions()) {
    const auto s = stats(dist);
    for (double d : {2.0, 3.0})
      for (int n = 1; n <= 10; ++n) {
        const auto sol = solve_optimal(build_program(dist, n, PaymentExponent(d)));
        if (!sol.converged) v.pass = false;
        worst_mean = std::min(worst_mean, n * std::pow(s.mean / n, 1.0 / d) - sol.total_revenue);
        worst_median = std::min(
            worst_median, n * std::pow(std::numbers::e * s.median / n, 1.0 / d) - sol.total_revenue);
        ++cells;
      }
  }
  v.pass = v.pass && worst_mean >= -1e-6 && worst_median >= -1e-6;
  v.detail = std::to_string(cells) + " cells, worst margins " + fmt(worst_mean, 4) + " (mean) and " +
             fmt(worst_median, 4) + " (median)";
  return v;
}

Verdict criterion_floors() {
  Verdict v;
  const double universal = 1.0 / (16.0 * std::numbers::e);
  double worst_median = 1e9, worst_mono = 1e9, worst_cost = 1e9, worst_pf = 1e9, min_pf = 1e9;
  for (std::size_t di = 0; di < grid_distributions().size(); ++di) {
    const auto& dist = grid_distributions()[di];
    const auto s = stats(dist);
    for (double d : {2.0, 3.0}) {
      const PaymentExponent exp(d);
      const double median_r = resolve_reserve(dist, ReservePolicy::median(), exp);
      const double cost_r = resolve_reserve(dist, ReservePolicy::cost_optimized(), exp);
      for (int n = 1; n <= 10; ++n) {
        const double opt = solve_optimal(build_program(dist, n, exp)).total_revenue;
        worst_median = std::min(worst_median, reserve_expected_revenue(dist, n, median_r, exp) / opt -
                                                  guarantee_of(GuaranteeKind::median_reserve, n, d));
        worst_cost = std::min(worst_cost, reserve_expected_revenue(dist, n, cost_r, exp) / opt -
                                              guarantee_of(GuaranteeKind::cost_optimized, n, d));
        GuaranteeRequest mono;
        mono.kind = GuaranteeKind::monopoly_reserve;
        mono.bidders = n;
        mono.exponent = d;
        mono.cdf_at_monopoly = 1.0 - s.monopoly_quantile;
        worst_mono = std::min(worst_mono,
                              reserve_expected_revenue(dist, n, s.monopoly_reserve, exp) / opt -
                                  guarantee(mono).value);
        if (n < 2) continue;
        Rng rng(child_seed(kSeed, {hash_label("floors"), di, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(d)}));
        RunningStats acc;
        std::vector<double> values(static_cast<std::size_t>(n));
        for (int sim = 0; sim < 10000; ++sim) {
          for (double& x : values) x = dist.sample(rng);
          acc.add(run_random_price_setter(values, exp, rng).revenue());
        }
        const auto est = acc.estimate();
        const double ratio = est.mean / opt;
        worst_pf = std::min(worst_pf, ratio - (guarantee_of(GuaranteeKind::prior_free, n, d) -
                                               3.0 * est.std_error / opt));
        min_pf = std::min(min_pf, ratio);
      }
    }
  }
  v.pass = worst_median >= 0.0 && worst_mono >= 0.0 && worst_cost >= 0.0 && worst_pf >= 0.0 &&
           min_pf >= universal;
  v.detail = "worst ratio - floor: median " + fmt(worst_median, 3) + ", monopoly " +
             fmt(worst_mono, 3) + ", cost-optimized " + fmt(worst_cost, 3) +
             ", prior-free (3 se) " + fmt(worst_pf, 3) + "; min prior-free ratio " +
             fmt(min_pf, 3) + " vs 1/(16e) = " + fmt(universal, 4);
  return v;
}

Verdict criterion_constants() {
  Verdict v;
  const double pf = guarantee_of(GuaranteeKind::prior_free, 30, 2.0);
  const double med = guarantee_of(GuaranteeKind::median_reserve, 30, 2.0);
  const bool pf_ok = pf >= 0.069 && pf <= 0.071;
  const bool med_ok = med >= 0.415 && med <= 0.425;
  v.pass = pf_ok && med_ok;
  v.detail = "prior_free(30, 2) = " + fmt(pf, 6) + (pf_ok ? " in" : " NOT in") +
             " [0.069, 0.071]; median(30, 2) = " + fmt(med, 6) + (med_ok ? " in" : " NOT in") +
             " [0.415, 0.425]";
  return v;
}

Verdict criterion_ordering() {
  Verdict v;
  const auto& r = scaled_runs().serial;
  const std::size_t last = r.n_values.size() - 1;
  auto ratio = [&](Mechanism m) {
    for (std::size_t i = 0; i < r.mechanisms.size(); ++i)
      if (r.mechanisms[i] == m) return r.cells[i][last].mean_ratio;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double virval = ratio(Mechanism::progc_virval), median = ratio(Mechanism::posted_median),
               val = ratio(Mechanism::progc_val), pf = ratio(Mechanism::prior_free),
               all = ratio(Mechanism::all_highest), high = ratio(Mechanism::highest);
  struct Link {
    const char* text;
    bool ok;
  };
  const Link links[] = {{"VirVal >= Median", virval >= median},
                        {"Median >= Val - 0.05", median >= val - 0.05},
                        {"Val - 0.05 >= PriorFree", val - 0.05 >= pf},
                        {"PriorFree >= AllHighest", pf >= all},
                        {"AllHighest >= Highest", all >= high},
                        {"Median >= 0.7", median >= 0.7}};
  std::string broken;
  for (const auto& l : links)
    if (!l.ok) broken += std::string(broken.empty() ? "" : ", ") + l.text;
  v.pass = broken.empty();
  v.detail = "n = " + std::to_string(r.n_values[last]) + ": VirVal " + fmt(virval, 4) + ", Median " +
             fmt(median, 4) + ", Val " + fmt(val, 4) + ", PriorFree " + fmt(pf, 4) + ", AllHighest " +
             fmt(all, 4) + ", Highest " + fmt(high, 4) +
             (broken.empty() ? "" : "; violated: " + broken);
  return v;
}

Verdict criterion_appendix_a() {
  Verdict v;
  const auto rows = appendix_a_scenario({16, 64, 256, 1024}, 0.01, 2.0, 10000, kSeed);
  std::string ratios;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].ratio > rows[i - 1].ratio)) v.pass = false;
    if (rows[i].highest_revenue > rows[i].highest_bound) v.pass = false;
    ratios += (i ? ", " : "") + fmt(rows[i].ratio, 4);
  }
  v.detail = "ratios " + ratios + " at n = 16, 64, 256, 1024; highest-wins revenue " +
             fmt(rows.back().highest_revenue, 4) + " <= bound " + fmt(rows.back().highest_bound, 4) +
             " at n = 1024";
  return v;
}

Verdict criterion_bic() {
  Verdict v;
  Rng rng(child_seed(kSeed, {hash_label("bic")}));
  int tables = 0, failures = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 10);
    std::vector<double> support(m), x(m);
    double t = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      support[k] = (t += 0.05 + 2.0 * uniform01(rng));
      x[k] = uniform01(rng);
    }
    std::sort(x.begin(), x.end());
    const PaymentExponent d(1.0 + 4.0 * uniform01(rng));
    if (!bic_check(make_interim_profile(support, x, d, 1 + trial % 5, "random")).ok) ++failures;
    ++tables;
  }

  // Ex-post IC of reserve mechanisms by exhaustive deviation.
  int profiles = 0;
  double worst_gain = 0.0;
  for (std::size_t m = 1; m <= 4; ++m) {
    std::vector<double> support(m), pmf(m, 1.0 / static_cast<double>(m));
    for (std::size_t k = 0; k < m; ++k) support[k] = 1.0 + static_cast<double>(k) * 0.75;
    const auto dist = make_distribution(support, pmf);
    for (int n = 1; n <= 3; ++n)
      for (double d : {1.0, 2.0, 3.0})
        for (double reserve : support) {
          const PaymentExponent exp(d);
          oracle::for_each_profile(dist, n, [&](const std::vector<double>& values, double) {
            const auto truthful = run_reserve_mechanism(values, reserve, exp);
            for (std::size_t i = 0; i < values.size(); ++i) {
              const double honest =
                  values[i] * truthful.allocations[i] - exp.cost(truthful.payments[i]);
              if (honest < -1e-12) worst_gain = std::max(worst_gain, -honest);
              for (double lie : support) {
                auto reports = values;
                reports[i] = lie;
                const auto out = run_reserve_mechanism(reports, reserve, exp);
                const double gain =
                    values[i] * out.allocations[i] - exp.cost(out.payments[i]) - honest;
                worst_gain = std::max(worst_gain, gain);
              }
            }
            ++profiles;
          });
        }
  }
  v.pass = failures == 0 && worst_gain <= 1e-12;
  v.detail = std::to_string(tables) + " monotone tables (" + std::to_string(failures) +
             " rejected); " + std::to_string(profiles) +
             " reserve-mechanism profiles, largest deviation gain " + fmt(worst_gain, 3);
  return v;
}

Verdict criterion_all_pay() {
  Verdict v;
  const PaymentExponent two(2.0);
  const auto uniform = make_distribution({1, 2}, {0.5, 0.5});
  const double uniform_revenue = all_pay_expected_revenue(uniform, 4, two);
  if (std::abs(uniform_revenue - 1.0) > 1e-9) v.pass = false;

  auto dists = generate_distributions(3, 12, kSeed + 1);
  dists.push_back(uniform);
  double worst_z = 0.0;
  int cells = 0;
  for (std::size_t di = 0; di < dists.size(); ++di)
    for (int n : {4, 8})
      for (double d : {2.0, 3.0}) {
        const auto& dist = dists[di];
        const PaymentExponent exp(d);
        const auto bids = all_pay_bids(dist, n, exp);
        for (std::size_t k = 1; k < bids.size(); ++k)
          if (bids[k] < bids[k - 1]) v.pass = false;
        Rng rng(child_seed(kSeed, {hash_label("all-pay"), di, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(d)}));
        RunningStats acc;
        for (int s = 0; s < 100000; ++s) {
          double total = 0.0;
          for (int i = 0; i < n; ++i) total += bids[dist.sample_index(rng)];
          acc.add(total);
        }
        const auto est = acc.estimate();
        const double z = std::abs(est.mean - all_pay_expected_revenue(dist, n, exp)) / est.std_error;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) v.pass = false;
        ++cells;
      }
  v.detail = std::to_string(cells) + " cells, worst |MC - exact| = " + fmt(worst_z, 3) +
             " se (limit 3); uniform n=4 revenue " + fmt(uniform_revenue, 12);
  return v;
}

Verdict criterion_determinism() {
  Verdict v;
  const auto& runs = scaled_runs();
  v.pass = runs.serial_revenue == runs.parallel_revenue && runs.serial_ratio == runs.parallel_ratio &&
           !runs.serial_ratio.empty();
  v.detail = "1 thread vs " + std::to_string(std::max(4u, std::thread::hardware_concurrency())) +
             " threads: mean_revenue.csv " +
             (runs.serial_revenue == runs.parallel_revenue ? "identical" : "DIFFERS") +
             ", ratio.csv " + (runs.serial_ratio == runs.parallel_ratio ? "identical" : "DIFFERS");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {1, "optimal solver vs grid oracle", criterion_solver_oracle},
      {2, "hand-solved instances", criterion_hand_solved},
      {3, "upper-bound sandwich", criterion_sandwich},
      {4, "guarantee floors", criterion_floors},
      {5, "guarantee constants at n=30, d=2", criterion_constants},
      {6, "mechanism ordering, scaled experiment", criterion_ordering},
      {7, "two-point prior growth", criterion_appendix_a},
      {8, "BIC and ex-post IC", criterion_bic},
      {9, "all-pay consistency", criterion_all_pay},
      {10, "determinism across thread counts", criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = c.run();
    } catch (const std::exception& e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!verdict.pass) ++failed;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", verdict.pass ? "PASS" : "FAIL", c.id, c.name,
                verdict.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
