#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lapdecon/grid.hpp"
#include "lapdecon/model.hpp"

namespace lapdecon {

// Density-level distances. MixtureDensity pairs are integrated by composite
// Gauss-Legendre with breakpoints at every atom over the +-40 window; grid
// pairs use Riemann sums and must share the same grid. L1 between mixtures is
// exact (closed form between atoms).

double hellinger(const MixtureDensity& p, const MixtureDensity& q);
double hellinger(const DensityGrid& p, const DensityGrid& q);

double l1_distance(const MixtureDensity& p, const MixtureDensity& q);
double l1_distance(const DensityGrid& p, const DensityGrid& q);

double l2_distance(const MixtureDensity& p, const MixtureDensity& q);
double l2_distance(const DensityGrid& p, const DensityGrid& q);

//! int p0 log(p0/q). Points where p0 < 1e-300 are dropped.
double kl_divergence(const MixtureDensity& p0, const MixtureDensity& q);
double kl_divergence(const DensityGrid& p0, const DensityGrid& q);

//! int p0 |log(p0/q)|^k, k >= 2.
double v_moment(const MixtureDensity& p0, const MixtureDensity& q, int k);
double v_moment(const DensityGrid& p0, const DensityGrid& q, int k);

//! Exact int |G1 - G2| by a merged-knot sweep.
double w1_distance(const StepCdf& g1, const StepCdf& g2);
//! (int_0^1 |G1^{-1}(u) - G2^{-1}(u)|^p du)^{1/p} by quantile coupling.
double wp_distance(const StepCdf& g1, const StepCdf& g2, double p);

double w1_distance(const DiscreteDistribution& g1, const DiscreteDistribution& g2);

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = true;
  double slack = 0.0;  // rhs - lhs
  bool applicable = true;
  double implied_constant = 0.0;  // only for the inversion check

  static InequalityReport make(double lhs, double rhs);
};

//! ||p1 - p2||_2^2 <= 4 ||f||_inf h^2(p1, p2) with ||f||_inf = 1/2.
InequalityReport l2_hellinger_bound_check(const MixtureDensity& m1, const MixtureDensity& m2);

enum class DistanceKind { l2, hellinger };
std::string to_string(DistanceKind k);

//! W_p(g1, g2) <= C d^{1/(p+2)} (log 1/d)^{(p+1/2)/(p+2)} with d the L2 or
//! Hellinger distance between the Laplace mixtures. For d >= 1/e the bound is
//! reported as not applicable.
InequalityReport inversion_inequality_check(const DiscreteDistribution& g1, const DiscreteDistribution& g2,
                                            double p, DistanceKind kind, double constant = 1.0);

// ---------------------------------------------------------------------------
// Kernel-smoothing bias asymptotics

//! Error law with algebraically decaying characteristic function.
struct ErrorLaw {
  enum class Kind { laplace, gamma, linnik };
  Kind kind = Kind::laplace;
  double shape = 1.0;  // gamma: nu; linnik: alpha
  double rate = 1.0;   // gamma: lambda

  static ErrorLaw laplace() { return {}; }
  static ErrorLaw gamma(double nu, double lambda) { return {Kind::gamma, nu, lambda}; }
  static ErrorLaw linnik(double alpha) { return {Kind::linnik, alpha, 1.0}; }

  //! Polynomial decay degree beta.
  [[nodiscard]] double beta() const;
  //! lim |t|^beta |f^(t)|.
  [[nodiscard]] double decay_constant() const;
  [[nodiscard]] double ft_modulus_sq(double t) const;
  void validate() const;
};

enum class SmoothingKernel { gaussian, laplace, sinc, dirac };
std::string to_string(SmoothingKernel k);
SmoothingKernel smoothing_kernel_from_string(const std::string& s);

//! Fourier transform of the kernel (all kernels here are symmetric, so real).
double kernel_ft(SmoothingKernel k, double t);
//! Characteristic exponent r (first nonvanishing moment order); +inf for the
//! band-limited and degenerate kernels.
double kernel_order(SmoothingKernel k);

//! (2 pi)^{-1} B_f^2 I^2_beta[K^].
double bias_limit(const ErrorLaw& f, SmoothingKernel k);

//! h^{-2(beta-1/2)} ||f - f * K_h||_2^2 via Plancherel, for each h.
std::vector<std::pair<double, double>> bias_rate_check(const ErrorLaw& f, SmoothingKernel k,
                                                       const std::vector<double>& h_grid);

}  // namespace lapdecon
