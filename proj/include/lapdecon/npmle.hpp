#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lapdecon/model.hpp"

namespace lapdecon {

struct SolverConfig {
  double grid_pad = 10.0;
  //! Candidate spacing; defaults to min(0.01, data range / 2000).
  std::optional<double> grid_step;
  double em_tol = 1e-10;  // accepted and validated; the Newton solver stops on grad_tol alone
  //! Gradient certificate tolerance; defaults to 1e-6 * n.
  std::optional<double> grad_tol;
  std::size_t max_iter = 100000;
  double prune_weight = 1e-8;
};

//! Config with every default filled in for a given sample.
struct ResolvedSolverConfig {
  double grid_pad;
  double grid_step;
  double em_tol;
  double grad_tol;
  std::size_t max_iter;
  double prune_weight;
};

ResolvedSolverConfig resolve(const SolverConfig& cfg, std::span<const double> x);

struct NpmleResult {
  DiscreteDistribution g_hat;
  double loglik;
  double gradient_sup;
  std::size_t iterations;
  bool converged;
  std::vector<double> loglik_trace;  // one entry per solver iteration
};

//! D_G(y) = sum_i f(x_i - y) / p_G(x_i) - n.
double gradient_function(const DiscreteDistribution& g, std::span<const double> x, double y);

//! Candidate support: grid over [min x - pad, max x + pad] merged with the
//! observations themselves. For the Laplace kernel D_G is convex between
//! consecutive observations, so its supremum is attained at an observation.
std::vector<double> candidate_locations(std::span<const double> x, const ResolvedSolverConfig& cfg);

NpmleResult fit_npmle(std::span<const double> x, const SolverConfig& cfg = {});

//! sum_j w_j exp(s y_j).
double mgf(const DiscreteDistribution& g, double s);

struct MgfDiagnosticRow {
  double s;
  double mean;                   // Monte Carlo mean of M_{G_hat}(s)
  std::optional<double> std_error;  // absent when reps == 1
  double truth;                  // M_{G0}(s)
};

//! Monte Carlo estimate of E[M_{G_hat_n}(s)] over `reps` replications.
std::vector<MgfDiagnosticRow> mgf_bias_diagnostic(const GroundTruthSpec& spec, const std::vector<double>& s_grid,
                                                  std::size_t n, std::size_t reps,
                                                  const SolverConfig& cfg = {});

}  // namespace lapdecon
