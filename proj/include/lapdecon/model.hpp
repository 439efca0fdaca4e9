#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lapdecon/rng.hpp"

namespace lapdecon {

inline constexpr double kLaplaceSup = 0.5;      // ||f||_inf of the standard Laplace density
inline constexpr double kAtomMergeTol = 1e-12;  // atoms closer than this are merged
inline constexpr double kTailWindow = 40.0;     // quadrature window beyond the atom range

double laplace_pdf(double z) noexcept;
double laplace_cdf(double z) noexcept;

//! Finitely supported probability measure on the real line.
//!
//! Atoms are kept strictly increasing; atoms within kAtomMergeTol of each other
//! are merged by adding their weights. Weights must be nonnegative and sum to
//! one (a relative mismatch up to 1e-9 is renormalized away).
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<double> atoms, std::vector<double> weights);

  static DiscreteDistribution point_mass(double at);
  //! Accepts any nonnegative weights with positive total and normalizes them.
  static DiscreteDistribution from_unnormalized(std::vector<double> atoms, std::vector<double> weights);

  [[nodiscard]] std::span<const double> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }

  [[nodiscard]] double cdf(double y) const noexcept;
  [[nodiscard]] double mean() const noexcept;
  //! Inverse-CDF draw.
  [[nodiscard]] double draw(CounterRng& rng) const noexcept;

 private:
  DiscreteDistribution() = default;
  void canonicalize();

  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

//! p_G = G * f for the standard Laplace kernel f.
class MixtureDensity {
 public:
  explicit MixtureDensity(DiscreteDistribution mixing) : mixing_(std::move(mixing)) {}

  [[nodiscard]] const DiscreteDistribution& mixing() const noexcept { return mixing_; }

  [[nodiscard]] double pdf(double x) const noexcept;
  [[nodiscard]] double cdf(double x) const noexcept;

  //! Evaluates at nondecreasing points in O(points + atoms).
  [[nodiscard]] std::vector<double> pdf_sorted(std::span<const double> xs) const;
  [[nodiscard]] std::vector<double> cdf_sorted(std::span<const double> xs) const;

  [[nodiscard]] double log_likelihood(std::span<const double> xs) const;

  //! Integration window [min atom - 40, max atom + 40].
  [[nodiscard]] double window_lo() const noexcept { return mixing_.atoms().front() - kTailWindow; }
  [[nodiscard]] double window_hi() const noexcept { return mixing_.atoms().back() + kTailWindow; }

 private:
  DiscreteDistribution mixing_;
};

//! Weighted sums S(t) = sum_j w_j exp(-|t - y_j|) at nondecreasing t, for
//! nondecreasing y. Also returns the "left" part (y_j <= t) separately so CDFs
//! can be assembled. Weights may be of either sign.
struct LaplaceSweep {
  std::vector<double> left;   // sum over y_j <= t of w_j e^{-(t - y_j)}
  std::vector<double> right;  // sum over y_j > t of w_j e^{-(y_j - t)}
  std::vector<double> mass_left;  // sum over y_j <= t of w_j
};
LaplaceSweep laplace_sweep(std::span<const double> ys, std::span<const double> ws,
                           std::span<const double> ts);

double log_likelihood(const MixtureDensity& m, std::span<const double> xs);

enum class Family { finite_discrete, exponential_tail, compact_uniform };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

//! Ground-truth mixing distribution for simulations.
struct GroundTruthSpec {
  Family family = Family::finite_discrete;
  // finite_discrete
  std::vector<double> atoms{0.0};
  std::vector<double> weights{1.0};
  // exponential_tail: G0 has density (c0/2) exp(-c0 |y|)
  double tail_rate = 1.0;
  // compact_uniform: uniform on [-half_width, half_width]
  double half_width = 1.0;
  // continuous families are discretized onto this many cells
  std::size_t num_atoms = 2000;
  std::uint64_t seed = 0;

  //! The (pre-discretized) mixing distribution G0.
  [[nodiscard]] DiscreteDistribution mixing() const;
  //! Tail bound G0([-T,T]^c) <= C exp(-c0 T); c0 = tail_rate for the
  //! exponential family, +inf (bounded support) otherwise.
  [[nodiscard]] double tail_exponent() const noexcept;
  void validate() const;
};

struct Sample {
  std::vector<double> x;
  std::optional<std::vector<double>> y;
  std::optional<std::vector<double>> z;
  std::uint64_t seed = 0;
};

//! n i.i.d. draws X = Y + Z with Y ~ G0 and Z standard Laplace. Latents kept.
Sample sample(const GroundTruthSpec& spec, std::size_t n);
Sample sample(const DiscreteDistribution& g0, std::size_t n, std::uint64_t seed);

}  // namespace lapdecon
