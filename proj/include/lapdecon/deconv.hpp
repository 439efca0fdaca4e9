#pragma once

#include <optional>
#include <span>

#include "lapdecon/grid.hpp"

namespace lapdecon {

//! Deconvolution kernel estimator with Gaussian kernel and standard Laplace
//! errors. Since 1/f^(t) = 1 + t^2, the deconvolving kernel is K_h - K_h''.
struct DeconvConfig {
  double bandwidth = 1.0;
  //! Evaluation grid; defaults to the data range padded by 10h + 5 at
  //! step min(1e-3, h/50).
  std::optional<GridSpec> grid;

  void validate() const;
};

//! h = c n^{-1/5}.
double default_bandwidth(std::size_t n, double c = 1.0);

GridSpec default_deconv_grid(std::span<const double> x, double bandwidth);

//! Raw estimator; may be negative in places.
DensityGrid deconv_density(std::span<const double> x, const DeconvConfig& cfg);

//! CDF of the nonnegativized, renormalized estimator, one knot per grid point.
StepCdf deconv_cdf(std::span<const double> x, const DeconvConfig& cfg);

//! Ordinary Gaussian KDE on the same grid (the convolution counterpart).
DensityGrid kernel_density(std::span<const double> x, const DeconvConfig& cfg);

}  // namespace lapdecon
