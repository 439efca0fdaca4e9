#include "lapdecon/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lapdecon {

double laplace_pdf(double z) noexcept { return 0.5 * std::exp(-std::abs(z)); }

double laplace_cdf(double z) noexcept {
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

// ---------------------------------------------------------------------------
// DiscreteDistribution

DiscreteDistribution::DiscreteDistribution(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw std::invalid_argument("DiscreteDistribution: no atoms");
  if (atoms_.size() != weights_.size())
    throw std::invalid_argument("DiscreteDistribution: atoms/weights length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i])) throw std::invalid_argument("DiscreteDistribution: non-finite atom");
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw std::invalid_argument("DiscreteDistribution: negative or non-finite weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("DiscreteDistribution: weights do not sum to one");
  canonicalize();
}

DiscreteDistribution DiscreteDistribution::point_mass(double at) { return {{at}, {1.0}}; }

DiscreteDistribution DiscreteDistribution::from_unnormalized(std::vector<double> atoms,
                                                             std::vector<double> weights) {
  if (atoms.size() != weights.size() || atoms.empty())
    throw std::invalid_argument("DiscreteDistribution: atoms/weights length mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("DiscreteDistribution: negative or non-finite weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("DiscreteDistribution: zero total weight");
  for (double& w : weights) w /= total;
  for (double a : atoms)
    if (!std::isfinite(a)) throw std::invalid_argument("DiscreteDistribution: non-finite atom");
  DiscreteDistribution d;
  d.atoms_ = std::move(atoms);
  d.weights_ = std::move(weights);
  d.canonicalize();
  return d;
}

void DiscreteDistribution::canonicalize() {
  std::vector<std::size_t> order(atoms_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return atoms_[a] < atoms_[b]; });
  std::vector<double> atoms;
  std::vector<double> weights;
  atoms.reserve(order.size());
  weights.reserve(order.size());
  for (std::size_t idx : order) {
    if (!atoms.empty() && atoms_[idx] - atoms.back() <= kAtomMergeTol) {
      weights.back() += weights_[idx];
    } else {
      atoms.push_back(atoms_[idx]);
      weights.push_back(weights_[idx]);
    }
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  atoms_ = std::move(atoms);
  weights_ = std::move(weights);
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

double DiscreteDistribution::cdf(double y) const noexcept {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), y);
  if (it == atoms_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteDistribution::mean() const noexcept {
  double m = 0.0;
  for (std::size_t j = 0; j < atoms_.size(); ++j) m += weights_[j] * atoms_[j];
  return m;
}

double DiscreteDistribution::draw(CounterRng& rng) const noexcept {
  const double u = rng.uniform();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
}

// ---------------------------------------------------------------------------
// Laplace sums

LaplaceSweep laplace_sweep(std::span<const double> ys, std::span<const double> ws,
                           std::span<const double> ts) {
  const std::size_t m = ts.size();
  const std::size_t k = ys.size();
  LaplaceSweep out{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};

  double acc = 0.0;
  double mass = 0.0;
  double prev = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = ts[i];
    if (i > 0) acc *= std::exp(-(t - prev));
    while (j < k && ys[j] <= t) {
      acc += ws[j] * std::exp(-(t - ys[j]));
      mass += ws[j];
      ++j;
    }
    out.left[i] = acc;
    out.mass_left[i] = mass;
    prev = t;
  }

  acc = 0.0;
  std::size_t r = k;
  for (std::size_t i = m; i-- > 0;) {
    const double t = ts[i];
    if (i + 1 < m) acc *= std::exp(-(prev - t));
    while (r > 0 && ys[r - 1] > t) {
      --r;
      acc += ws[r] * std::exp(-(ys[r] - t));
    }
    out.right[i] = acc;
    prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// MixtureDensity

double MixtureDensity::pdf(double x) const noexcept {
  const auto a = mixing_.atoms();
  const auto w = mixing_.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += w[j] * std::exp(-std::abs(x - a[j]));
  return 0.5 * s;
}

double MixtureDensity::cdf(double x) const noexcept {
  const auto a = mixing_.atoms();
  const auto w = mixing_.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += w[j] * laplace_cdf(x - a[j]);
  return std::clamp(s, 0.0, 1.0);
}

std::vector<double> MixtureDensity::pdf_sorted(std::span<const double> xs) const {
  auto sw = laplace_sweep(mixing_.atoms(), mixing_.weights(), xs);
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = 0.5 * (sw.left[i] + sw.right[i]);
  return out;
}

std::vector<double> MixtureDensity::cdf_sorted(std::span<const double> xs) const {
  auto sw = laplace_sweep(mixing_.atoms(), mixing_.weights(), xs);
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out[i] = std::clamp(sw.mass_left[i] - 0.5 * sw.left[i] + 0.5 * sw.right[i], 0.0, 1.0);
  return out;
}

double MixtureDensity::log_likelihood(std::span<const double> xs) const {
  // Direct evaluation for small problems, sorted sweep otherwise.
  if (xs.size() * mixing_.size() <= 1u << 20) {
    double s = 0.0;
    for (double x : xs) s += std::log(pdf(x));
    return s;
  }
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto p = pdf_sorted(sorted);
  double s = 0.0;
  for (double v : p) s += std::log(v);
  return s;
}

double log_likelihood(const MixtureDensity& m, std::span<const double> xs) {
  return m.log_likelihood(xs);
}

// ---------------------------------------------------------------------------
// Ground truth

std::string to_string(Family f) {
  switch (f) {
    case Family::finite_discrete: return "finite-discrete";
    case Family::exponential_tail: return "exponential-tail";
    case Family::compact_uniform: return "compact-uniform-discretized";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "finite-discrete") return Family::finite_discrete;
  if (s == "exponential-tail") return Family::exponential_tail;
  if (s == "compact-uniform-discretized") return Family::compact_uniform;
  throw std::invalid_argument("unknown ground-truth family: " + s);
}

void GroundTruthSpec::validate() const {
  switch (family) {
    case Family::finite_discrete:
      if (atoms.empty() || atoms.size() != weights.size())
        throw std::invalid_argument("finite-discrete: atoms/weights mismatch");
      break;
    case Family::exponential_tail:
      if (!(tail_rate > 0.0) || !std::isfinite(tail_rate))
        throw std::invalid_argument("exponential-tail: rate must be positive");
      break;
    case Family::compact_uniform:
      if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("compact-uniform: half width must be positive");
      break;
  }
  if (family != Family::finite_discrete && (num_atoms < 1 || num_atoms > 10000))
    throw std::invalid_argument("num_atoms must be in [1, 10000]");
}

double GroundTruthSpec::tail_exponent() const noexcept {
  return family == Family::exponential_tail ? tail_rate : std::numeric_limits<double>::infinity();
}

DiscreteDistribution GroundTruthSpec::mixing() const {
  validate();
  switch (family) {
    case Family::finite_discrete:
      return DiscreteDistribution(atoms, weights);
    case Family::exponential_tail: {
      // Truncate where the two-sided tail mass exp(-c0 T) drops below 1e-10.
      const double t = std::log(1e10) / tail_rate;
      const double width = 2.0 * t / static_cast<double>(num_atoms);
      std::vector<double> a(num_atoms), w(num_atoms);
      auto cdf = [&](double y) { return laplace_cdf(tail_rate * y); };
      for (std::size_t j = 0; j < num_atoms; ++j) {
        const double lo = -t + width * static_cast<double>(j);
        a[j] = lo + 0.5 * width;
        w[j] = cdf(lo + width) - cdf(lo);
      }
      return DiscreteDistribution::from_unnormalized(std::move(a), std::move(w));
    }
    case Family::compact_uniform: {
      const double width = 2.0 * half_width / static_cast<double>(num_atoms);
      std::vector<double> a(num_atoms), w(num_atoms, 1.0);
      for (std::size_t j = 0; j < num_atoms; ++j)
        a[j] = -half_width + width * (static_cast<double>(j) + 0.5);
      return DiscreteDistribution::from_unnormalized(std::move(a), std::move(w));
    }
  }
  throw std::logic_error("unreachable");
}

Sample sample(const DiscreteDistribution& g0, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  CounterRng rng(seed);
  Sample s;
  s.seed = seed;
  s.x.resize(n);
  std::vector<double> y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = g0.draw(rng);
    z[i] = rng.laplace();
    s.x[i] = y[i] + z[i];
  }
  s.y = std::move(y);
  s.z = std::move(z);
  return s;
}

Sample sample(const GroundTruthSpec& spec, std::size_t n) {
  return sample(spec.mixing(), n, spec.seed);
}

}  // namespace lapdecon
