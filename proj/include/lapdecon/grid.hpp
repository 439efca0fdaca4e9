#pragma once

#include <span>
#include <vector>

#include "lapdecon/model.hpp"

namespace lapdecon {

inline constexpr double kMetricGridStep = 1e-3;

//! Uniform grid lo, lo + step, ..., covering [lo, hi].
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  double step = kMetricGridStep;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double at(std::size_t k) const noexcept { return lo + step * static_cast<double>(k); }
  [[nodiscard]] std::vector<double> points() const;
  [[nodiscard]] bool same_as(const GridSpec& other) const noexcept;

  //! Grid with the default metric step over [lo - 40, hi + 40].
  static GridSpec padded(double lo, double hi, double step = kMetricGridStep);
};

//! Density values on a uniform grid. Integrals are Riemann sums (step * sum).
class DensityGrid {
 public:
  DensityGrid(GridSpec grid, std::vector<double> values);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double integral() const noexcept;
  [[nodiscard]] double min_value() const noexcept;
  [[nodiscard]] double max_value() const noexcept;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

DensityGrid to_grid(const MixtureDensity& m, const GridSpec& grid);

//! Clips negative values to zero and rescales to unit Riemann mass.
DensityGrid nonnegativize(const DensityGrid& g);

//! Right-continuous piecewise-constant CDF: value `values[k]` on [knots[k], knots[k+1]).
class StepCdf {
 public:
  StepCdf(std::vector<double> knots, std::vector<double> values);

  static StepCdf from_discrete(const DiscreteDistribution& d);

  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] double operator()(double y) const noexcept;
  //! Left-continuous inverse inf{y : G(y) >= u}, u in (0, 1].
  [[nodiscard]] double quantile(double u) const noexcept;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace lapdecon
