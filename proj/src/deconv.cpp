#include "lapdecon/deconv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lapdecon {

namespace {

constexpr double kKernelCutoff = 10.0;  // in bandwidths; exp(-50) beyond

void check_data(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("deconv: empty data");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("deconv: non-finite observation");
}

// Adds (1/n) sum_i kernel((t - x_i)/h)/h over the grid, visiting only grid
// points within the cutoff of each observation.
template <typename Kernel>
std::vector<double> smooth(std::span<const double> x, const GridSpec& grid, double h, Kernel&& kernel) {
  std::vector<double> out(grid.size(), 0.0);
  const double scale = 1.0 / (static_cast<double>(x.size()) * h);
  const auto last = static_cast<std::ptrdiff_t>(out.size()) - 1;
  for (double xi : x) {
    const auto k0 = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(std::ceil((xi - kKernelCutoff * h - grid.lo) / grid.step)));
    const auto k1 = std::min<std::ptrdiff_t>(
        last, static_cast<std::ptrdiff_t>(std::floor((xi + kKernelCutoff * h - grid.lo) / grid.step)));
    for (std::ptrdiff_t k = k0; k <= k1; ++k) {
      const double u = (grid.at(static_cast<std::size_t>(k)) - xi) / h;
      out[static_cast<std::size_t>(k)] += scale * kernel(u);
    }
  }
  return out;
}

}  // namespace

void DeconvConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw std::invalid_argument("deconv: bandwidth must be positive");
}

double default_bandwidth(std::size_t n, double c) {
  if (n == 0) throw std::invalid_argument("default_bandwidth: n must be positive");
  return c * std::pow(static_cast<double>(n), -0.2);
}

GridSpec default_deconv_grid(std::span<const double> x, double bandwidth) {
  check_data(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double pad = kKernelCutoff * bandwidth + 5.0;
  return {*lo - pad, *hi + pad, std::min(1e-3, bandwidth / 50.0)};
}

DensityGrid deconv_density(std::span<const double> x, const DeconvConfig& cfg) {
  check_data(x);
  cfg.validate();
  const double h = cfg.bandwidth;
  const GridSpec grid = cfg.grid.value_or(default_deconv_grid(x, h));
  // K(u) - K''(u)/h^2 with K'' (u) = (u^2 - 1) K(u) for the standard normal K.
  const double inv_h2 = 1.0 / (h * h);
  auto values = smooth(x, grid, h, [inv_h2](double u) {
    const double k = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return k * (1.0 - (u * u - 1.0) * inv_h2);
  });
  return {grid, std::move(values)};
}

DensityGrid kernel_density(std::span<const double> x, const DeconvConfig& cfg) {
  check_data(x);
  cfg.validate();
  const GridSpec grid = cfg.grid.value_or(default_deconv_grid(x, cfg.bandwidth));
  auto values = smooth(x, grid, cfg.bandwidth,
                       [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); });
  return {grid, std::move(values)};
}

StepCdf deconv_cdf(std::span<const double> x, const DeconvConfig& cfg) {
  const auto density = nonnegativize(deconv_density(x, cfg));
  const auto& grid = density.grid();
  const auto v = density.values();
  std::vector<double> cdf(v.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += v[k] * grid.step;
    cdf[k] = std::clamp(acc, 0.0, 1.0);
  }
  cdf.back() = 1.0;
  return {grid.points(), std::move(cdf)};
}

}  // namespace lapdecon
