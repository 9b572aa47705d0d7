#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "convex_auction/bounds.hpp"
#include "convex_auction/error.hpp"
#include "convex_auction/mechanisms.hpp"
#include "convex_auction/optimal.hpp"
#include "convex_auction/sim.hpp"

namespace cvxauction {

namespace fs = std::filesystem;
using namespace convex_auction;

namespace {

std::string fmt(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure: return kIo;
    case ErrorCode::SolverFailed: return kNumeric;
    default: return kUsage;
  }
}

unsigned thread_cap() {
  const char* env = std::getenv("CAL_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) throw Error(ErrorCode::BadConfig, "CAL_THREADS must be a non-negative integer");
  return static_cast<unsigned>(v);
}

struct GenDistsArgs {
  std::size_t count = 50;
  std::size_t support = 50;
  std::uint64_t seed = 1;
  std::string out = "dists";
};

int gen_dists(const GenDistsArgs& a, std::ostream& out) {
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + a.out);
  const auto dists = generate_distributions(a.count, a.support, a.seed);
  for (std::size_t i = 0; i < dists.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "dist_%03zu.csv", i);
    save_distribution(fs::path(a.out) / name, dists[i]);
  }
  out << "wrote " << dists.size() << " distributions to " << a.out << "\n";
  return kOk;
}

struct SolveArgs {
  std::string dist;
  int n = 1;
  double d = 2.0;
  double tol = 1e-10;
  int max_iters = 500;
  std::string out = ".";
};

int solve_opt(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const auto dist = load_distribution(a.dist);
  const auto program = build_program(dist, a.n, PaymentExponent(a.d));
  SolverParams params;
  params.tolerance = a.tol;
  params.max_iters = a.max_iters;
  const auto sol = solve_optimal(program, params);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  const auto path = fs::path(a.out) / ("opt_" + fs::path(a.dist).stem().string() + "_n" +
                                       std::to_string(a.n) + ".csv");
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_solution_csv(file, program, sol);
  if (!file) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());

  out << std::fixed << std::setprecision(10) << sol.total_revenue << "\n" << std::defaultfloat;
  out << "iterations " << sol.iterations << ", gap " << fmt(sol.duality_gap, 3)
      << ", stationarity " << fmt(sol.stationarity, 3) << ", sidecar " << path.string() << "\n";
  if (!sol.converged) {
    err << "NotConverged: no optimality certificate after " << sol.iterations << " iterations\n";
    return kNumeric;
  }
  return kOk;
}

int simulate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = load_config(config_path);
  if (const unsigned cap = thread_cap(); cap > 0)
    config.threads = config.threads == 0 ? cap : std::min(config.threads, cap);
  const auto report = run_experiment(config);
  const auto files = write_report(report, config.out_dir);
  print_summary(out, report, config.d);
  out << "payments: " << to_string(config.payments) << "\n";
  out << "wrote " << files.revenue.string() << " and " << files.ratio.string() << "\n";
  if (!report.solver_failures.empty()) {
    err << "SolverFailed: " << report.solver_failures.size() << " uncertified cell(s)\n";
    for (const auto& cell : report.solver_failures) err << "  " << cell << "\n";
    return kNumeric;
  }
  return kOk;
}

struct AppendixArgs {
  std::vector<int> n_list{16, 64, 256, 1024};
  double eps = 0.01;
  double d = 2.0;
  std::size_t sims = 10000;
  std::uint64_t seed = 1;
};

int appendix_a(const AppendixArgs& a, std::ostream& out) {
  const auto rows = appendix_a_scenario(a.n_list, a.eps, a.d, a.sims, a.seed);
  out << std::left << std::setw(8) << "n" << std::setw(12) << "P(high)" << std::setw(14)
      << "uniform" << std::setw(22) << "highest (stderr)" << std::setw(14) << "bound"
      << "ratio\n";
  for (const auto& r : rows)
    out << std::setw(8) << r.n << std::setw(12) << fmt(r.high_probability) << std::setw(14)
        << fmt(r.uniform_revenue) << std::setw(22)
        << (fmt(r.highest_revenue) + " (" + fmt(r.highest_stderr, 2) + ")") << std::setw(14)
        << fmt(r.highest_bound) << fmt(r.ratio) << "\n";
  out << std::right;
  return kOk;
}

struct VerifyArgs {
  std::string dist;
  std::string all;
  int n_max = 10;
  double d = 2.0;
  bool mhr_bounds = false;
};

// Smallest slack seen for one property; negative means violated.
struct Margin {
  explicit Margin(std::string label) : name(std::move(label)) {}

  std::string name;
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  std::size_t checks = 0;

  void record(double slack, const std::string& at) {
    ++checks;
    if (slack < worst) {
      worst = slack;
      where = at;
    }
  }
};

double floor_value(GuaranteeKind kind, int n, double d) {
  GuaranteeRequest r;
  r.kind = kind;
  r.bidders = n;
  r.exponent = d;
  return guarantee(r).value;
}

int verify_bounds(const VerifyArgs& a, std::ostream& out) {
  std::vector<fs::path> files;
  if (!a.dist.empty()) files.emplace_back(a.dist);
  if (!a.all.empty()) {
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(a.all, ec))
      if (entry.is_regular_file()) files.push_back(entry.path());
    if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + a.all);
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw Error(ErrorCode::BadConfig, "no distribution files given");

  std::vector<std::pair<fs::path, DiscreteDistribution>> dists;
  for (const auto& f : files) {
    auto dist = load_distribution(f);
    if (a.mhr_bounds && !is_mhr(dist))
      throw Error(ErrorCode::NotMhr, f.string() + " does not have a monotone hazard rate");
    dists.emplace_back(f, std::move(dist));
  }

  const PaymentExponent d(a.d);
  const double tol = 1e-6;
  Margin mean_ub{"OPT <= n (mean/n)^(1/d)"}, median_ub{"OPT <= n (e median/n)^(1/d)"},
      dominates{"OPT >= truthful mechanisms"}, monotone{"OPT non-decreasing in n"},
      f_median{"median reserve floor"}, f_monopoly{"monopoly reserve floor"},
      f_cost{"cost-optimized floor"}, f_prior{"prior-free floor"};
  std::size_t skipped = 0, unconverged = 0;

  for (const auto& [path, dist] : dists) {
    const auto s = stats(dist);
    const bool mhr = is_mhr(dist);
    if (!mhr) ++skipped;
    const double median_r = resolve_reserve(dist, ReservePolicy::median(), d);
    const double cost_r = a.d > 1.0 ? resolve_reserve(dist, ReservePolicy::cost_optimized(), d) : 0.0;
    double previous = 0.0;
    for (int n = 1; n <= a.n_max; ++n) {
      const std::string at = path.filename().string() + " n=" + std::to_string(n);
      const auto sol = solve_optimal(build_program(dist, n, d));
      if (!sol.converged) ++unconverged;
      const double opt = sol.total_revenue;

      mean_ub.record(n * std::pow(s.mean / n, 1.0 / a.d) - opt + tol, at);
      monotone.record(opt - previous + tol, at);
      previous = opt;

      const double med = reserve_expected_revenue(dist, n, median_r, d);
      const double mono = reserve_expected_revenue(dist, n, s.monopoly_reserve, d);
      double best = std::max(med, mono);
      const double pf = n >= 2 ? price_setter_expected_revenue(dist, n, d) : 0.0;
      best = std::max(best, pf);
      dominates.record(opt - best + tol, at);

      if (!mhr) continue;
      median_ub.record(n * std::pow(std::exp(1.0) * s.median / n, 1.0 / a.d) - opt + tol, at);
      if (a.d < 2.0) continue;
      f_median.record(med / opt - floor_value(GuaranteeKind::median_reserve, n, a.d), at);
      f_cost.record(reserve_expected_revenue(dist, n, cost_r, d) / opt -
                        floor_value(GuaranteeKind::cost_optimized, n, a.d),
                    at);
      GuaranteeRequest r;
      r.kind = GuaranteeKind::monopoly_reserve;
      r.bidders = n;
      r.exponent = a.d;
      r.cdf_at_monopoly = 1.0 - s.monopoly_quantile;
      f_monopoly.record(mono / opt - guarantee(r).value, at);
      if (n >= 2) f_prior.record(pf / opt - floor_value(GuaranteeKind::prior_free, n, a.d), at);
    }
  }

  bool ok = unconverged == 0;
  out << "verified " << dists.size() << " distribution(s), n = 1.." << a.n_max << ", d = " << fmt(a.d)
      << "\n";
  for (const Margin* m : {&mean_ub, &median_ub, &dominates, &monotone, &f_median, &f_monopoly,
                          &f_cost, &f_prior}) {
    out << std::left << std::setw(30) << m->name << std::right;
    if (m->checks == 0) {
      out << "not checked\n";
      continue;
    }
    const bool pass = m->worst >= 0.0;
    ok = ok && pass;
    out << (pass ? "PASS" : "FAIL") << "  worst margin " << fmt(m->worst) << " at " << m->where
        << "\n";
  }
  if (skipped) out << skipped << " non-MHR distribution(s): MHR-only properties skipped\n";
  if (unconverged) out << unconverged << " solve(s) without an optimality certificate\n";
  out << (ok ? "all properties hold" : "some properties FAILED") << "\n";
  return ok ? kOk : kNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Revenue experiments for auctions with convex payment costs", "cvxauction"};
  app.require_subcommand(1);

  GenDistsArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dists", "Write random MHR distributions on {1..m}");
  gen_cmd->add_option("--count", gen.count, "Number of distributions")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--support", gen.support, "Support size m")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve-opt", "Solve the optimal symmetric auction");
  solve_cmd->add_option("--dist", solve.dist, "Distribution file")->required();
  solve_cmd->add_option("--n", solve.n, "Number of bidders")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--d", solve.d, "Payment exponent d >= 1");
  solve_cmd->add_option("--tol", solve.tol, "Certificate tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration limit")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", solve.out, "Directory for the solution sidecar");

  std::string config_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Run an experiment from a config file");
  sim_cmd->add_option("--config", config_path, "key = value config file")->required();

  AppendixArgs appx;
  auto* appx_cmd = app.add_subcommand("appendix-a", "Uniform vs highest-wins on a two-point prior");
  appx_cmd->add_option("--n-list", appx.n_list, "Bidder counts")->delimiter(',');
  appx_cmd->add_option("--eps", appx.eps, "Gap epsilon in (0, 1)");
  appx_cmd->add_option("--d", appx.d, "Payment exponent");
  appx_cmd->add_option("--sims", appx.sims, "Monte Carlo samples")->check(CLI::PositiveNumber);
  appx_cmd->add_option("--seed", appx.seed, "Seed");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify-bounds", "Check sandwich and guarantee properties");
  auto* one = verify_cmd->add_option("--dist", verify.dist, "Distribution file");
  auto* all = verify_cmd->add_option("--all", verify.all, "Directory of distribution files");
  one->excludes(all);
  verify_cmd->add_option("--n-max", verify.n_max, "Largest bidder count")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--d", verify.d, "Payment exponent");
  verify_cmd->add_flag("--mhr-bounds", verify.mhr_bounds, "Refuse non-MHR inputs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return gen_dists(gen, out);
    if (*solve_cmd) return solve_opt(solve, out, err);
    if (*sim_cmd) return simulate(config_path, out, err);
    if (*appx_cmd) return appendix_a(appx, out);
    if (*verify_cmd) {
      if (verify.dist.empty() && verify.all.empty()) {
        err << "verify-bounds: one of --dist or --all is required\n";
        return kUsage;
      }
      return verify_bounds(verify, out);
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "IoFailure: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace cvxauction
