#include "convex_auction/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "convex_auction/error.hpp"
#include "convex_auction/mechanisms.hpp"
#include "convex_auction/payments.hpp"
#include "convex_auction/rng.hpp"

namespace convex_auction {

namespace {

const std::vector<MechanismInfo> kRegistry = {
    {Mechanism::prior_free, "prior_free", "Prior Free"},
    {Mechanism::posted_median, "posted_median", "Posted Median"},
    {Mechanism::posted_monopoly, "posted_monopoly", "Posted Monopoly"},
    {Mechanism::highest, "highest", "To Highest (No Reserve)"},
    {Mechanism::highest_monopoly, "highest_monopoly", "To Highest (Monopoly Reserve)"},
    {Mechanism::all_highest, "all_highest", "To All Highest (No Reserve)"},
    {Mechanism::all_highest_monopoly, "all_highest_monopoly",
     "To All Highest (Monopoly Reserve)"},
    {Mechanism::progc_val, "progc_val", "ProgC Val"},
    {Mechanism::progc_virval, "progc_virval", "ProgC VirVal"},
    {Mechanism::posted_cost_optimized, "posted_cost_optimized", "Posted Cost Optimized"},
    {Mechanism::all_pay, "all_pay", "All Pay (Top Quarter)"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadConfig, key + ": expected an integer, got '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, const std::string& key) {
  const long v = parse_long(s, key);
  if (v < 1) throw Error(ErrorCode::BadConfig, key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<int> parse_bidder_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) {
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const long lo = parse_long(trim(item.substr(0, dash)), "n_values");
      const long hi = parse_long(trim(item.substr(dash + 1)), "n_values");
      for (long n = lo; n <= hi; ++n) out.push_back(static_cast<int>(n));
    } else {
      out.push_back(static_cast<int>(parse_long(item, "n_values")));
    }
  }
  for (int n : out)
    if (n < 1) throw Error(ErrorCode::BadConfig, "n_values must be >= 1");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct CellResult {
  double opt = 0.0;
  bool opt_converged = true;
  std::vector<double> revenue;
  std::vector<double> stderr_;
  std::vector<bool> defined;
};

Estimate monte_carlo_price_setter(const DiscreteDistribution& dist, int n,
                                  PaymentExponent d, std::size_t sims, Rng& rng) {
  RunningStats acc;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < sims; ++s) {
    for (double& v : values) v = dist.sample(rng);
    acc.add(run_random_price_setter(values, d, rng).revenue());
  }
  return acc.estimate();
}

CellResult evaluate_cell(const ExperimentConfig& config, const DiscreteDistribution& dist,
                         std::size_t dist_index, int n) {
  const PaymentExponent d(config.d);
  CellResult cell;
  const std::filesystem::path cache =
      config.use_cache ? config.out_dir / "cache" : std::filesystem::path{};
  const OptSolution opt = solve_cached(dist, n, config.d, config.solver, cache);
  cell.opt = opt.total_revenue;
  cell.opt_converged = opt.converged;

  const double eta = monopoly(dist).reserve;
  for (Mechanism mech : config.mechanisms) {
    Rng rng(child_seed(config.master_seed,
                       {hash_label("cell"), dist_index, static_cast<std::uint64_t>(n),
                        hash_label(mechanism_info(mech).name)}));
    Estimate est;
    bool defined = true;
    switch (mech) {
      case Mechanism::prior_free:
        if (n < 2)
          defined = false;
        else
          est = monte_carlo_price_setter(dist, n, d, config.sims_per_cell, rng);
        break;
      case Mechanism::posted_median:
        est.mean = reserve_expected_revenue(
            dist, n, resolve_reserve(dist, ReservePolicy::median(), d), d);
        break;
      case Mechanism::posted_monopoly:
        est.mean = reserve_expected_revenue(dist, n, eta, d);
        break;
      case Mechanism::posted_cost_optimized:
        est.mean = reserve_expected_revenue(
            dist, n, resolve_reserve(dist, ReservePolicy::cost_optimized(), d), d);
        break;
      case Mechanism::highest:
      case Mechanism::highest_monopoly:
      case Mechanism::all_highest:
      case Mechanism::all_highest_monopoly: {
        const bool single = mech == Mechanism::highest || mech == Mechanism::highest_monopoly;
        const bool reserve =
            mech == Mechanism::highest_monopoly || mech == Mechanism::all_highest_monopoly;
        const auto kind = single ? HighestKind::single_highest : HighestKind::all_highest;
        const auto cutoff = reserve ? std::optional<double>(eta) : std::nullopt;
        if (config.payments == PaymentRule::ex_post) {
          est = simulate_rank_ex_post(dist, n, kind, cutoff, d, config.sims_per_cell, rng);
        } else {
          est.mean = profile_expected_revenue(dist, rank_profile(dist, n, rank_rule(kind), cutoff, d));
        }
        break;
      }
      case Mechanism::progc_val:
      case Mechanism::progc_virval: {
        const auto basis = mech == Mechanism::progc_val ? ProportionalBasis::value
                                                        : ProportionalBasis::virtual_value;
        if (config.payments == PaymentRule::ex_post)
          est = simulate_proportional_ex_post(dist, n, basis, d, config.sims_per_cell, rng);
        else
          est = estimate_proportional_revenue(dist, n, basis, d, config.sims_per_cell, rng).revenue;
        break;
      }
      case Mechanism::all_pay:
        if (n % 4 != 0)
          defined = false;
        else
          est.mean = all_pay_expected_revenue(dist, n, d);
        break;
    }
    cell.revenue.push_back(est.mean);
    cell.stderr_.push_back(est.std_error);
    cell.defined.push_back(defined);
  }
  return cell;
}

void validate(const ExperimentConfig& config) {
  if (config.n_values.empty()) throw Error(ErrorCode::BadConfig, "n_values is empty");
  if (config.num_distributions == 0 || config.support_size == 0 || config.sims_per_cell == 0)
    throw Error(ErrorCode::BadConfig, "counts must be >= 1");
  PaymentExponent d(config.d);
  for (Mechanism m : config.mechanisms) {
    if ((m == Mechanism::progc_val || m == Mechanism::progc_virval ||
         m == Mechanism::posted_cost_optimized) &&
        d.value() <= 1.0)
      throw Error(ErrorCode::InvalidExponent,
                  std::string(mechanism_info(m).name) + " needs d > 1");
  }
}

}  // namespace

const char* to_string(PaymentRule rule) {
  return rule == PaymentRule::ex_post ? "ex_post" : "interim";
}

const std::vector<MechanismInfo>& mechanism_registry() { return kRegistry; }

const MechanismInfo& mechanism_info(Mechanism m) {
  for (const auto& info : kRegistry)
    if (info.id == m) return info;
  throw Error(ErrorCode::UnknownMechanism, "unregistered mechanism");
}

Mechanism parse_mechanism(std::string_view name) {
  for (const auto& info : kRegistry)
    if (info.name == name) return info.id;
  std::string valid;
  for (const auto& info : kRegistry) {
    if (!valid.empty()) valid += ", ";
    valid += info.name;
  }
  throw Error(ErrorCode::UnknownMechanism,
              "unknown mechanism '" + std::string(name) + "'; valid names: " + valid);
}

std::vector<Mechanism> default_mechanisms() {
  return {Mechanism::prior_free,       Mechanism::posted_median,
          Mechanism::posted_monopoly,  Mechanism::highest,
          Mechanism::highest_monopoly, Mechanism::all_highest,
          Mechanism::all_highest_monopoly, Mechanism::progc_val,
          Mechanism::progc_virval};
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  config.n_values.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "num_distributions") {
      config.num_distributions = parse_count(value, key);
    } else if (key == "support_size") {
      config.support_size = parse_count(value, key);
    } else if (key == "n_values") {
      config.n_values = parse_bidder_list(value);
    } else if (key == "d") {
      try {
        config.d = std::stod(value);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::BadConfig, "d: expected a number");
      }
    } else if (key == "sims") {
      config.sims_per_cell = parse_count(value, key);
    } else if (key == "seed") {
      config.master_seed = static_cast<std::uint64_t>(parse_long(value, key));
    } else if (key == "payments") {
      if (value == "ex_post")
        config.payments = PaymentRule::ex_post;
      else if (value == "interim")
        config.payments = PaymentRule::interim;
      else
        throw Error(ErrorCode::BadConfig, "payments: expected ex_post or interim");
    } else if (key == "mechanisms") {
      config.mechanisms.clear();
      for (const auto& name : split_list(value)) config.mechanisms.push_back(parse_mechanism(name));
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else if (key == "threads") {
      config.threads = static_cast<unsigned>(parse_long(value, key));
    } else {
      throw Error(ErrorCode::BadConfig, "unknown key '" + key + "'");
    }
  }
  if (config.n_values.empty()) throw Error(ErrorCode::BadConfig, "n_values is required");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return parse_config(in);
}

std::vector<DiscreteDistribution> generate_distributions(std::size_t count,
                                                         std::size_t support_size,
                                                         std::uint64_t master_seed) {
  std::vector<DiscreteDistribution> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(child_seed(master_seed, {hash_label("distribution"), i}));
    out.push_back(gen_random_mhr(support_size, rng));
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<DiscreteDistribution>* distributions) {
  validate(config);
  const std::vector<DiscreteDistribution> generated =
      distributions ? std::vector<DiscreteDistribution>{}
                    : generate_distributions(config.num_distributions, config.support_size,
                                             config.master_seed);
  const auto& dists = distributions ? *distributions : generated;
  if (dists.empty()) throw Error(ErrorCode::BadConfig, "no distributions");

  const std::size_t num_n = config.n_values.size();
  const std::size_t total = dists.size() * num_n;
  std::vector<CellResult> results(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        const std::size_t di = job / num_n;
        results[job] = evaluate_cell(config, dists[di], di, config.n_values[job % num_n]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.n_values = config.n_values;
  report.mechanisms = config.mechanisms;
  report.cells.assign(config.mechanisms.size(), std::vector<CellStats>(num_n));
  report.opt_revenue.assign(num_n, 0.0);
  const double count = static_cast<double>(dists.size());
  for (std::size_t ni = 0; ni < num_n; ++ni) {
    for (std::size_t di = 0; di < dists.size(); ++di) {
      const CellResult& cell = results[di * num_n + ni];
      report.opt_revenue[ni] += cell.opt / count;
      if (!cell.opt_converged)
        report.solver_failures.push_back("distribution " + std::to_string(di) + ", n=" +
                                         std::to_string(config.n_values[ni]));
    }
    for (std::size_t mi = 0; mi < config.mechanisms.size(); ++mi) {
      CellStats& stats = report.cells[mi][ni];
      double rev_var = 0.0, ratio_var = 0.0;
      for (std::size_t di = 0; di < dists.size(); ++di) {
        const CellResult& cell = results[di * num_n + ni];
        if (!cell.defined[mi]) {
          stats.defined = false;
          continue;
        }
        stats.mean_revenue += cell.revenue[mi] / count;
        stats.mean_ratio += cell.revenue[mi] / cell.opt / count;
        rev_var += cell.stderr_[mi] * cell.stderr_[mi];
        ratio_var += std::pow(cell.stderr_[mi] / cell.opt, 2);
      }
      stats.revenue_stderr = std::sqrt(rev_var) / count;
      stats.ratio_stderr = std::sqrt(ratio_var) / count;
    }
  }
  return report;
}

DiscreteDistribution appendix_a_distribution(int n, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1)");
  if (n < 2) throw Error(ErrorCode::BadBidderCount, "scenario needs n >= 2");
  const double p = std::log(static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
  return make_distribution({1.0 - epsilon, 1.0}, {1.0 - p, p});
}

std::vector<AppendixARow> appendix_a_scenario(const std::vector<int>& n_values,
                                              double epsilon, double d_value,
                                              std::size_t sims, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1)");
  if (sims == 0) throw Error(ErrorCode::BadConfig, "sims must be >= 1");
  const PaymentExponent d(d_value);
  std::vector<AppendixARow> rows;
  for (int n : n_values) {
    const DiscreteDistribution dist = appendix_a_distribution(n, epsilon);
    AppendixARow row;
    row.n = n;
    row.high_probability = dist.mass(1);
    // Every bidder clears the reserve 1 - ε, so all n share the good.
    row.uniform_revenue = n * d.inverse_cost((1.0 - epsilon) / n);

    const auto profile = rank_profile(dist, n, RankRule::single_highest, std::nullopt, d);
    row.highest_exact = profile_expected_revenue(dist, profile);
    Rng rng(child_seed(seed, {hash_label("appendix-a"), static_cast<std::uint64_t>(n)}));
    RunningStats acc;
    for (std::size_t s = 0; s < sims; ++s) {
      double revenue = 0.0;
      for (int i = 0; i < n; ++i) revenue += profile.actual_payment[dist.sample_index(rng)];
      acc.add(revenue);
    }
    const Estimate est = acc.estimate();
    row.highest_revenue = est.mean;
    row.highest_stderr = est.std_error;
    row.ratio = row.uniform_revenue / row.highest_revenue;
    row.highest_bound = 3.0 * std::pow(n, 0.25) * std::log(static_cast<double>(n));
    rows.push_back(row);
  }
  return rows;
}

std::string opt_cache_key(const DiscreteDistribution& dist, int n, double d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double t = dist.value(k), f = dist.mass(k);
    mix(&t, sizeof t);
    mix(&f, sizeof f);
  }
  const std::int64_t bidders = n;
  mix(&bidders, sizeof bidders);
  mix(&d, sizeof d);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OptSolution solve_cached(const DiscreteDistribution& dist, int n, double d,
                         const SolverParams& params,
                         const std::filesystem::path& cache_dir) {
  const BorderProgram program = build_program(dist, n, PaymentExponent(d));
  if (cache_dir.empty()) return solve_optimal(program, params);

  const auto path = cache_dir / ("opt_" + opt_cache_key(dist, n, d) + ".csv");
  if (std::ifstream in(path); in) {
    try {
      return read_solution_csv(in, program);
    } catch (const Error&) {
      // Unreadable entry; fall through and overwrite it.
    }
  }
  OptSolution sol = solve_optimal(program, params);
  if (sol.converged) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    // Write-once: a unique temporary then an atomic rename.
    std::ostringstream tag;
    tag << std::this_thread::get_id();
    const auto tmp = path.string() + ".tmp" + tag.str();
    {
      std::ofstream out(tmp);
      if (out) write_solution_csv(out, program, sol);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }
  return sol;
}

}  // namespace convex_auction
