#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lapdecon/grid.hpp"
#include "lapdecon/rng.hpp"

namespace lapdecon {

//! Dirichlet process prior with total mass alpha(R) and base density
//! alpha'(y) proportional to exp(-b |y|^tau), tau in (0, 1].
struct DpPrior {
  double total_mass = 1.0;
  double base_b = 1.0;
  double base_tau = 1.0;

  void validate() const;
  //! log of 2 Gamma(1 + 1/tau) / b^{1/tau}.
  [[nodiscard]] double log_normalizer() const;
  //! Half-width T with base mass outside [-T, T] below `tail`.
  [[nodiscard]] double base_half_width(double tail = 1e-10) const;
};

double base_density(const DpPrior& prior, double y);
double base_log_density(const DpPrior& prior, double y);
double base_cdf(const DpPrior& prior, double y);
double base_sample(const DpPrior& prior, CounterRng& rng);
//! E exp(sY) under the base; finite only for tau = 1 and |s| < b (or s = 0).
double base_mgf(const DpPrior& prior, double s);

struct McmcConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 5;
  std::size_t aux_components = 3;
  double location_step = 0.5;
  bool adapt = true;  // tune location_step during burn-in towards 44% acceptance
  std::uint64_t seed = 1;

  void validate() const;
};

struct PosteriorSample {
  std::vector<std::uint32_t> assignments;
  std::vector<double> cluster_locations;
  std::vector<std::uint32_t> cluster_sizes;
};

struct ChainTrace {
  std::vector<std::size_t> cluster_count;  // per iteration
  std::vector<double> loglik;              // sum_i log f(x_i - location of i's cluster)
  double final_step = 0.0;
  double acceptance_rate = 0.0;  // post burn-in location moves
};

struct ChainResult {
  std::vector<PosteriorSample> draws;
  ChainTrace trace;
};

//! Collapsed Gibbs sampler with m auxiliary components for the reassignment of
//! each observation, followed by random-walk Metropolis on every cluster
//! location. Calls `on_draw` for each retained (post burn-in, thinned) state.
ChainTrace run_chain(std::span<const double> x, const DpPrior& prior, const McmcConfig& cfg,
                     const std::function<void(const PosteriorSample&)>& on_draw);
ChainResult run_chain(std::span<const double> x, const DpPrior& prior, const McmcConfig& cfg);

struct BayesEstimates {
  DensityGrid mean_density;  // posterior mean of p_G
  StepCdf mean_cdf;          // posterior mean of G
  double ess = 0.0;          // of the per-draw log-likelihood
  std::size_t draws_used = 0;
};

//! Grid over the data range and the base support, padded by 40, step 1e-3.
GridSpec default_bayes_grid(std::span<const double> x, const DpPrior& prior);

//! Folds draws into the predictive estimates without keeping them.
class BayesAccumulator {
 public:
  BayesAccumulator(std::span<const double> x, const DpPrior& prior);

  void add(const PosteriorSample& draw);
  [[nodiscard]] std::size_t draws() const noexcept { return loglik_.size(); }
  [[nodiscard]] BayesEstimates finish(const GridSpec& grid) const;
  //! Pooled cluster atoms with weights summing to n / (total_mass + n).
  [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> pooled_atoms() const;

 private:
  std::vector<double> x_;
  DpPrior prior_;
  std::vector<std::pair<double, double>> atoms_;  // (location, size), summed later
  std::vector<double> loglik_;
};

BayesEstimates bayes_estimates(const std::vector<PosteriorSample>& draws, std::span<const double> x,
                               const DpPrior& prior, std::optional<GridSpec> grid = std::nullopt);

//! Predictive MGF of one draw: (M M_alpha(s) + sum_k n_k e^{s y_k}) / (M + n).
double predictive_mgf(const PosteriorSample& draw, std::size_t n, const DpPrior& prior, double s);
double posterior_mgf(const std::vector<PosteriorSample>& draws, std::span<const double> x, const DpPrior& prior,
                     double s);

//! Effective sample size from the initial positive sequence of autocorrelations.
double effective_sample_size(std::span<const double> trace);

}  // namespace lapdecon
