#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "convex_auction/distribution.hpp"
#include "convex_auction/exponent.hpp"

namespace convex_auction {

/// Interim allocation of the highest-value-wins auction with random
/// tie-breaking, per type:
///   y(t) = Σ_k C(n-1, k) / (k+1) · F(t-1)^(n-1-k) · f(t)^k.
std::vector<double> border_y(const DiscreteDistribution& dist, int n);

/// Optimal symmetric BIC/IIR auction as a program over the allocation steps
/// z_τ = x̂(t_τ) - x̂(t_{τ-1}) >= 0:
///
///   maximize   Σ_t f(t) (Σ_{τ<=t} t_τ z_τ)^(1/d)
///   subject to Σ_τ z_τ (1 - F(max{t,τ} - 1)) <= Σ_{q>=t} f(q) y(q)   for all t
///
/// Row t bounds the expected allocation to types at or above t by what the
/// highest-value auction gives them; the sum runs over every τ, since a step
/// at τ < t still raises the allocation of every type at or above t.
struct BorderProgram {
  DiscreteDistribution dist;
  int bidders;
  PaymentExponent exponent;
  std::vector<double> y;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd rhs;
};

BorderProgram build_program(const DiscreteDistribution& dist, int n, PaymentExponent d);

struct SolverParams {
  int max_iters = 500;
  /// Bound on the certified optimality gap of the per-bidder objective.
  double tolerance = 1e-10;
};

struct OptSolution {
  std::vector<double> z;
  std::vector<double> x_hat;
  std::vector<double> c_hat;
  /// Program objective: expected revenue from one bidder.
  double objective = 0.0;
  double total_revenue = 0.0;
  /// max(0, A z - b) per row.
  std::vector<double> residuals;
  /// max_k (∇g - Aᵀλ)_k⁺ at the returned iterate.
  double stationarity = 0.0;
  /// λᵀ(b - Az)⁺ + νᵀz with ν = (Aᵀλ - ∇g)⁺.
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Primal-dual interior-point method on the smoothed objective
/// Σ f(t) ((ĉ_t + ε)^(1/d) - ε^(1/d)), ε = 1e-12. The reported objective is
/// the unsmoothed one at the final iterate. Convergence is declared from the
/// first-order certificate gap + 2 stationarity <= tolerance; a solve that
/// runs out of iterations is returned with converged = false.
OptSolution solve_optimal(const BorderProgram& program, const SolverParams& params = {});

/// Unsmoothed program objective Σ f(t) ĉ_t^(1/d) for a given step vector.
double program_objective(const BorderProgram& program, const std::vector<double>& z);

/// Grid-search oracle for supports of size <= 3: scans the first m-1 steps on
/// a grid and sets the last step to its largest feasible value (the objective
/// is increasing in every step). Returns total revenue.
double brute_force_optimal(const DiscreteDistribution& dist, int n, PaymentExponent d,
                           double step);

/// Sidecar with columns type,z,x_hat,c_hat.
void write_solution_csv(std::ostream& out, const BorderProgram& program,
                        const OptSolution& solution);

/// Reads a sidecar back and recomputes the derived fields against `program`.
OptSolution read_solution_csv(std::istream& in, const BorderProgram& program);

}  // namespace convex_auction
