#include "lapdecon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lapdecon {

std::size_t GridSpec::size() const {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("GridSpec: invalid bounds or step");
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::vector<double> GridSpec::points() const {
  std::vector<double> pts(size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = at(k);
  return pts;
}

bool GridSpec::same_as(const GridSpec& other) const noexcept {
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  return std::abs(lo - other.lo) <= 1e-12 * scale && std::abs(step - other.step) <= 1e-15 * scale &&
         size() == other.size();
}

GridSpec GridSpec::padded(double lo, double hi, double step) {
  return {lo - kTailWindow, hi + kTailWindow, step};
}

DensityGrid::DensityGrid(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("DensityGrid: size mismatch");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("DensityGrid: non-finite value");
}

double DensityGrid::integral() const noexcept {
  return grid_.step * std::accumulate(values_.begin(), values_.end(), 0.0);
}

double DensityGrid::min_value() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double DensityGrid::max_value() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

DensityGrid to_grid(const MixtureDensity& m, const GridSpec& grid) {
  const auto pts = grid.points();
  return {grid, m.pdf_sorted(pts)};
}

DensityGrid nonnegativize(const DensityGrid& g) {
  std::vector<double> v(g.values().begin(), g.values().end());
  for (double& x : v) x = std::max(x, 0.0);
  const double mass = g.grid().step * std::accumulate(v.begin(), v.end(), 0.0);
  if (!(mass > 0.0)) throw std::invalid_argument("nonnegativize: no positive mass");
  for (double& x : v) x /= mass;
  return {g.grid(), std::move(v)};
}

StepCdf::StepCdf(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size())
    throw std::invalid_argument("StepCdf: knots/values length mismatch");
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k])) throw std::invalid_argument("StepCdf: non-finite knot");
    if (k > 0 && !(knots_[k] > knots_[k - 1])) throw std::invalid_argument("StepCdf: knots not increasing");
    if (!(values_[k] >= 0.0 && values_[k] <= 1.0 + 1e-12))
      throw std::invalid_argument("StepCdf: value outside [0, 1]");
    if (k > 0 && values_[k] < values_[k - 1]) throw std::invalid_argument("StepCdf: values decreasing");
  }
  if (std::abs(values_.back() - 1.0) > 1e-12) throw std::invalid_argument("StepCdf: final value is not 1");
  values_.back() = 1.0;
}

StepCdf StepCdf::from_discrete(const DiscreteDistribution& d) {
  std::vector<double> knots(d.atoms().begin(), d.atoms().end());
  std::vector<double> values(d.size());
  std::partial_sum(d.weights().begin(), d.weights().end(), values.begin());
  for (double& v : values) v = std::min(v, 1.0);
  values.back() = 1.0;
  return {std::move(knots), std::move(values)};
}

double StepCdf::operator()(double y) const noexcept {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
  if (it == knots_.begin()) return 0.0;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepCdf::quantile(double u) const noexcept {
  auto it = std::lower_bound(values_.begin(), values_.end(), u);
  if (it == values_.end()) --it;
  return knots_[static_cast<std::size_t>(it - values_.begin())];
}

}  // namespace lapdecon
