#include "convex_auction/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "convex_auction/error.hpp"
#include "convex_auction/payments.hpp"

namespace convex_auction {

namespace {

constexpr double kSmoothing = 1e-12;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Smoothed per-type utility ψ(c) = (c + ε)^(1/d) and its derivatives.
struct Smoothed {
  double power;
  double value(double c) const { return std::pow(c + kSmoothing, power); }
  double slope(double c) const { return power * std::pow(c + kSmoothing, power - 1.0); }
  double curvature(double c) const {
    return power * (power - 1.0) * std::pow(c + kSmoothing, power - 2.0);
  }
};

// Primal-dual interior-point method on
//   max g(z)  s.t.  A z + s = b,  z >= 0,  s >= 0
// with multipliers λ (rows) and ν (z >= 0). Each iteration takes a damped
// Newton step on the perturbed KKT system
//   ∇g(z) - Aᵀλ + ν = 0,   λ∘s = σμ,   ν∘z = σμ.
class InteriorPointSolver {
 public:
  InteriorPointSolver(const BorderProgram& program, const SolverParams& params)
      : p_(program),
        params_(params),
        m_(static_cast<Eigen::Index>(program.dist.size())),
        psi_{1.0 / program.exponent.value()},
        values_(m_),
        masses_(m_),
        lower_(MatrixXd::Zero(m_, m_)) {
    for (Eigen::Index k = 0; k < m_; ++k) {
      values_[k] = program.dist.value(static_cast<std::size_t>(k));
      masses_[k] = program.dist.mass(static_cast<std::size_t>(k));
      for (Eigen::Index j = 0; j <= k; ++j) lower_(k, j) = values_[j];
    }
  }

  OptSolution run() {
    const MatrixXd& a = p_.coefficients;
    VectorXd z = initial_point();
    VectorXd s = p_.rhs - a * z;
    const double mu0 = std::max(smoothed_objective(z), 1e-6) / (2.0 * static_cast<double>(m_));
    VectorXd lambda = mu0 * s.cwiseInverse();
    VectorXd nu = mu0 * z.cwiseInverse();

    // The barrier target never drops below this floor, so the Newton system
    // stays well conditioned once the complementarity term is negligible.
    const double mu_floor = params_.tolerance / (100.0 * static_cast<double>(m_));

    OptSolution sol;
    VectorXd best_z = z, best_lambda = lambda;
    double best_bound = std::numeric_limits<double>::infinity();
    int iterations = 0;
    while (iterations < params_.max_iters) {
      const double bound = certify(z, lambda, sol);
      if (bound < best_bound) {
        best_bound = bound;
        best_z = z;
        best_lambda = lambda;
      }
      if (bound <= params_.tolerance) break;
      ++iterations;

      const VectorXd c = cumulative_payment(z);
      const VectorXd grad = objective_gradient(c);
      const VectorXd r_dual = grad - a.transpose() * lambda + nu;
      const VectorXd r_primal = p_.rhs - a * z - s;
      const double mu = (lambda.dot(s) + nu.dot(z)) / (2.0 * static_cast<double>(m_));
      const double target = std::max(kCentering * mu, mu_floor);

      VectorXd weight(m_);
      for (Eigen::Index k = 0; k < m_; ++k) weight[k] = -masses_[k] * psi_.curvature(c[k]);
      MatrixXd system = lower_.transpose() * weight.asDiagonal() * lower_;
      const VectorXd row_weight = lambda.cwiseQuotient(s);
      system += a.transpose() * row_weight.asDiagonal() * a;
      system.diagonal() += nu.cwiseQuotient(z);

      const VectorXd row_term =
          (VectorXd::Constant(m_, target) - lambda.cwiseProduct(s) - lambda.cwiseProduct(r_primal))
              .cwiseQuotient(s);
      const VectorXd bound_term =
          (VectorXd::Constant(m_, target) - nu.cwiseProduct(z)).cwiseQuotient(z);
      const VectorXd rhs = r_dual - a.transpose() * row_term + bound_term;

      // Symmetric diagonal scaling; the complementarity weights span many
      // orders of magnitude near the boundary.
      const VectorXd scale = system.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      const MatrixXd scaled = scale.asDiagonal() * system * scale.asDiagonal();
      Eigen::LDLT<MatrixXd> ldlt(scaled);
      const VectorXd dz = scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * rhs);
      if (!dz.allFinite()) break;
      const VectorXd ds = r_primal - a * dz;
      const VectorXd dlambda = row_term + row_weight.cwiseProduct(a * dz);
      const VectorXd dnu = bound_term - nu.cwiseQuotient(z).cwiseProduct(dz);

      double alpha = 1.0;
      shrink_to_boundary(z, dz, alpha);
      shrink_to_boundary(s, ds, alpha);
      shrink_to_boundary(lambda, dlambda, alpha);
      shrink_to_boundary(nu, dnu, alpha);

      z += alpha * dz;
      s += alpha * ds;
      lambda += alpha * dlambda;
      nu += alpha * dnu;
    }

    sol.converged = certify(best_z, best_lambda, sol) <= params_.tolerance;
    sol.iterations = iterations;
    fill_primal(best_z, sol);
    return sol;
  }

 private:
  static constexpr double kCentering = 0.1;
  static constexpr double kBoundaryFraction = 0.995;

  static void shrink_to_boundary(const VectorXd& v, const VectorXd& dv, double& alpha) {
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (dv[k] < 0.0) alpha = std::min(alpha, -kBoundaryFraction * v[k] / dv[k]);
  }

  VectorXd cumulative_payment(const VectorXd& z) const { return lower_ * z; }

  double smoothed_objective(const VectorXd& z) const {
    const VectorXd c = cumulative_payment(z);
    double obj = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) obj += masses_[k] * psi_.value(c[k]);
    return obj;
  }

  // ∂/∂z_τ = t_τ Σ_{k>=τ} f_k ψ'(ĉ_k).
  VectorXd objective_gradient(const VectorXd& c) const {
    VectorXd g(m_);
    double tail = 0.0;
    for (Eigen::Index k = c.size(); k-- > 0;) {
      tail += masses_[k] * psi_.slope(c[k]);
      g[k] = values_[k] * tail;
    }
    return g;
  }

  // For concave g, any feasible z* and any λ, ν >= 0,
  //   g(z*) - g(z) <= λᵀ(b - Az) + νᵀz + ||r||_∞ ||z* - z||_1,
  // with r = ∇g - Aᵀλ + ν, and ||z* - z||_1 <= 2 because Σz = x̂(t_m) <= 1.
  // ν_k = max(0, -(∇g - Aᵀλ)_k) minimizes ν_k z_k + 2|r_k| for z_k <= 1.
  double certify(const VectorXd& z, const VectorXd& lambda, OptSolution& sol) const {
    const VectorXd slack = (p_.rhs - p_.coefficients * z).cwiseMax(0.0);
    const VectorXd reduced = objective_gradient(cumulative_payment(z)) -
                             p_.coefficients.transpose() * lambda;
    const VectorXd nu = (-reduced).cwiseMax(0.0);
    sol.stationarity = reduced.cwiseMax(0.0).lpNorm<Eigen::Infinity>();
    sol.duality_gap = lambda.dot(slack) + nu.dot(z);
    const double bound = sol.duality_gap + 2.0 * sol.stationarity;
    return std::isfinite(bound) ? bound : std::numeric_limits<double>::infinity();
  }

  void fill_primal(const VectorXd& z, OptSolution& sol) const {
    sol.z.assign(z.data(), z.data() + z.size());
    const auto m = static_cast<std::size_t>(m_);
    sol.x_hat.resize(m);
    sol.c_hat.resize(m);
    double x = 0.0, c = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x += sol.z[k];
      c += p_.dist.value(k) * sol.z[k];
      sol.x_hat[k] = x;
      sol.c_hat[k] = c;
    }
    const VectorXd excess = p_.coefficients * z - p_.rhs;
    sol.residuals.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      sol.residuals[k] = std::max(0.0, excess[static_cast<Eigen::Index>(k)]);
    sol.objective = program_objective(p_, sol.z);
    sol.total_revenue = p_.bidders * sol.objective;
  }

  // x̂ = y/2 + (k+1)/(4nm): every step is positive and each row uses at most
  // three quarters of its right-hand side (y is non-decreasing with mean 1/n).
  VectorXd initial_point() const {
    VectorXd z(m_);
    const double lift = 1.0 / (4.0 * p_.bidders * static_cast<double>(m_));
    double previous = 0.0;
    for (Eigen::Index k = 0; k < m_; ++k) {
      const double x = 0.5 * p_.y[static_cast<std::size_t>(k)] + lift * static_cast<double>(k + 1);
      z[k] = x - previous;
      previous = x;
    }
    return z;
  }

  const BorderProgram& p_;
  SolverParams params_;
  Eigen::Index m_;
  Smoothed psi_;
  VectorXd values_;
  VectorXd masses_;
  MatrixXd lower_;
};

}  // namespace

std::vector<double> border_y(const DiscreteDistribution& dist, int n) {
  return interim_rank_allocation(dist, n, RankRule::single_highest);
}

BorderProgram build_program(const DiscreteDistribution& dist, int n, PaymentExponent d) {
  if (n < 1) throw Error(ErrorCode::BadBidderCount, "need at least one bidder");
  const std::size_t m = dist.size();
  BorderProgram program{dist, n, d, border_y(dist, n), MatrixXd(m, m), VectorXd(m)};
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t tau = 0; tau < m; ++tau)
      program.coefficients(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(tau)) =
          dist.survival(std::max(t, tau));
  }
  double acc = 0.0;
  for (std::size_t t = m; t-- > 0;) {
    acc += dist.mass(t) * program.y[t];
    program.rhs[static_cast<Eigen::Index>(t)] = acc;
  }
  return program;
}

double program_objective(const BorderProgram& program, const std::vector<double>& z) {
  const double power = 1.0 / program.exponent.value();
  double c = 0.0, obj = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    c += program.dist.value(k) * z[k];
    if (c > 0.0) obj += program.dist.mass(k) * std::pow(c, power);
  }
  return obj;
}

OptSolution solve_optimal(const BorderProgram& program, const SolverParams& params) {
  return InteriorPointSolver(program, params).run();
}

double brute_force_optimal(const DiscreteDistribution& dist, int n, PaymentExponent d,
                           double step) {
  const std::size_t m = dist.size();
  if (m > 3) throw Error(ErrorCode::SupportTooLarge, "grid oracle supports m <= 3");
  if (!(step > 0.0)) throw Error(ErrorCode::BadConfig, "grid step must be positive");
  const BorderProgram program = build_program(dist, n, d);
  const auto& a = program.coefficients;
  const auto& b = program.rhs;
  const auto rows = a.rows();
  const auto last = static_cast<Eigen::Index>(m - 1);

  auto cap = [&](Eigen::Index var, const VectorXd& used) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows; ++r)
      if (a(r, var) > 0.0) best = std::min(best, (b[r] - used[r]) / a(r, var));
    return best;
  };

  double best = 0.0;
  std::vector<double> z(m, 0.0);
  auto finish = [&](const VectorXd& used) {
    const double room = cap(last, used);
    if (room < 0.0) return;
    z[m - 1] = room;
    best = std::max(best, program_objective(program, z));
  };

  const VectorXd none = VectorXd::Zero(rows);
  if (m == 1) {
    finish(none);
  } else {
    const double cap0 = cap(0, none);
    for (double z0 = 0.0; z0 <= cap0 + 1e-15; z0 += step) {
      z[0] = z0;
      const VectorXd used0 = a.col(0) * z0;
      if (m == 2) {
        finish(used0);
        continue;
      }
      const double cap1 = cap(1, used0);
      for (double z1 = 0.0; z1 <= cap1 + 1e-15; z1 += step) {
        z[1] = z1;
        finish(used0 + a.col(1) * z1);
      }
    }
  }
  return n * best;
}

void write_solution_csv(std::ostream& out, const BorderProgram& program,
                        const OptSolution& solution) {
  out << "type,z,x_hat,c_hat\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < solution.z.size(); ++k)
    out << program.dist.value(k) << ',' << solution.z[k] << ',' << solution.x_hat[k]
        << ',' << solution.c_hat[k] << '\n';
}

OptSolution read_solution_csv(std::istream& in, const BorderProgram& program) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("type,z,x_hat,c_hat", 0) != 0)
    throw Error(ErrorCode::IoFailure, "solution sidecar has no header");
  OptSolution sol;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double fields[4];
    for (double& f : fields) {
      if (!std::getline(row, cell, ','))
        throw Error(ErrorCode::IoFailure, "short solution row");
      f = std::stod(cell);
    }
    sol.z.push_back(fields[1]);
    sol.x_hat.push_back(fields[2]);
    sol.c_hat.push_back(fields[3]);
  }
  if (sol.z.size() != program.dist.size())
    throw Error(ErrorCode::IoFailure, "solution sidecar does not match the program");
  const VectorXd z = Eigen::Map<const VectorXd>(sol.z.data(), static_cast<Eigen::Index>(sol.z.size()));
  const VectorXd excess = program.coefficients * z - program.rhs;
  sol.residuals.resize(sol.z.size());
  for (std::size_t k = 0; k < sol.z.size(); ++k)
    sol.residuals[k] = std::max(0.0, excess[static_cast<Eigen::Index>(k)]);
  sol.objective = program_objective(program, sol.z);
  sol.total_revenue = program.bidders * sol.objective;
  sol.converged = true;
  return sol;
}

}  // namespace convex_auction
