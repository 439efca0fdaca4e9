#include "lapdecon/dp_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lapdecon/model.hpp"

namespace lapdecon {

// ---------------------------------------------------------------------------
// Prior

void DpPrior::validate() const {
  if (!(total_mass > 0.0) || !std::isfinite(total_mass)) throw std::invalid_argument("DpPrior: total_mass must be positive");
  if (!(base_b > 0.0) || !std::isfinite(base_b)) throw std::invalid_argument("DpPrior: b must be positive");
  if (!(base_tau > 0.0 && base_tau <= 1.0)) throw std::invalid_argument("DpPrior: tau must lie in (0, 1]");
}

double DpPrior::log_normalizer() const {
  return std::numbers::ln2 + std::lgamma(1.0 + 1.0 / base_tau) - std::log(base_b) / base_tau;
}

double DpPrior::base_half_width(double tail) const {
  validate();
  const double g = boost::math::gamma_q_inv(1.0 / base_tau, tail);
  return std::pow(g / base_b, 1.0 / base_tau);
}

double base_log_density(const DpPrior& prior, double y) {
  return -prior.base_b * std::pow(std::abs(y), prior.base_tau) - prior.log_normalizer();
}

double base_density(const DpPrior& prior, double y) { return std::exp(base_log_density(prior, y)); }

double base_cdf(const DpPrior& prior, double y) {
  if (y == 0.0) return 0.5;
  const double tail = boost::math::gamma_q(1.0 / prior.base_tau, prior.base_b * std::pow(std::abs(y), prior.base_tau));
  return y > 0.0 ? 1.0 - 0.5 * tail : 0.5 * tail;
}

double base_sample(const DpPrior& prior, CounterRng& rng) {
  if (prior.base_tau == 1.0) return rng.laplace() / prior.base_b;
  std::gamma_distribution<double> gamma(1.0 / prior.base_tau, 1.0);
  const double radius = std::pow(gamma(rng) / prior.base_b, 1.0 / prior.base_tau);
  return rng.uniform() < 0.5 ? -radius : radius;
}

double base_mgf(const DpPrior& prior, double s) {
  if (s == 0.0) return 1.0;
  if (prior.base_tau == 1.0 && std::abs(s) < prior.base_b) {
    const double b2 = prior.base_b * prior.base_b;
    return b2 / (b2 - s * s);
  }
  throw std::domain_error("base measure has no finite MGF at this s");
}

void McmcConfig::validate() const {
  if (iterations == 0 || burn_in >= iterations) throw std::invalid_argument("McmcConfig: need burn_in < iterations");
  if (thin == 0) throw std::invalid_argument("McmcConfig: thin must be >= 1");
  if (aux_components == 0) throw std::invalid_argument("McmcConfig: aux_components must be >= 1");
  if (!(location_step > 0.0)) throw std::invalid_argument("McmcConfig: location_step must be positive");
}

// ---------------------------------------------------------------------------
// Sampler

namespace {

class DpLaplaceChain {
 public:
  DpLaplaceChain(std::span<const double> x, const DpPrior& prior, const McmcConfig& cfg)
      : x_(x.begin(), x.end()), prior_(prior), cfg_(cfg), rng_(cfg.seed), step_(cfg.location_step) {
    std::vector<double> sorted = x_;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    locs_.push_back(sorted[sorted.size() / 2]);
    sizes_.push_back(static_cast<std::uint32_t>(x_.size()));
    assign_.assign(x_.size(), 0);
    aux_.resize(cfg.aux_components);
  }

  ChainTrace run(const std::function<void(const PosteriorSample&)>& on_draw) {
    ChainTrace trace;
    trace.cluster_count.reserve(cfg_.iterations);
    trace.loglik.reserve(cfg_.iterations);
    std::size_t batch_accept = 0, batch_moves = 0, batches = 0;
    std::size_t accepted = 0, moves = 0;
    for (std::size_t it = 0; it < cfg_.iterations; ++it) {
      reassign_all();
      const auto [acc, mv, loglik] = update_locations();
      if (it < cfg_.burn_in) {
        batch_accept += acc;
        batch_moves += mv;
        if (cfg_.adapt && (it + 1) % 50 == 0 && batch_moves > 0) {
          ++batches;
          const double rate = static_cast<double>(batch_accept) / static_cast<double>(batch_moves);
          const double gain = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(batches)));
          step_ *= std::exp(gain * (rate - 0.44));
          batch_accept = batch_moves = 0;
        }
      } else {
        accepted += acc;
        moves += mv;
        if ((it - cfg_.burn_in) % cfg_.thin == 0) on_draw(snapshot());
      }
      trace.cluster_count.push_back(active_);
      trace.loglik.push_back(loglik);
    }
    trace.final_step = step_;
    trace.acceptance_rate = moves > 0 ? static_cast<double>(accepted) / static_cast<double>(moves) : 0.0;
    return trace;
  }

 private:
  void reassign_all() {
    const double new_weight = prior_.total_mass / static_cast<double>(aux_.size());
    std::vector<double>& w = weights_;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const std::uint32_t k = assign_[i];
      std::size_t first_fresh = 0;
      if (--sizes_[k] == 0) {
        aux_[0] = locs_[k];
        first_fresh = 1;
        free_.push_back(k);
        --active_;
      }
      for (std::size_t j = first_fresh; j < aux_.size(); ++j) aux_[j] = base_sample(prior_, rng_);

      const double xi = x_[i];
      const std::size_t slots = locs_.size();
      w.resize(slots + aux_.size());
      double total = 0.0;
      for (std::size_t c = 0; c < slots; ++c) {
        const double v = sizes_[c] > 0 ? sizes_[c] * std::exp(-std::abs(xi - locs_[c])) : 0.0;
        w[c] = v;
        total += v;
      }
      for (std::size_t j = 0; j < aux_.size(); ++j) {
        const double v = new_weight * std::exp(-std::abs(xi - aux_[j]));
        w[slots + j] = v;
        total += v;
      }

      double u = rng_.uniform() * total;
      std::size_t pick = w.size() - 1;  // aux weights are always positive
      for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] == 0.0) continue;
        u -= w[c];
        if (u < 0.0) {
          pick = c;
          break;
        }
      }

      if (pick < slots) {
        assign_[i] = static_cast<std::uint32_t>(pick);
        ++sizes_[pick];
      } else {
        const double loc = aux_[pick - slots];
        std::uint32_t slot;
        if (!free_.empty()) {
          slot = free_.back();
          free_.pop_back();
          locs_[slot] = loc;
          sizes_[slot] = 1;
        } else {
          slot = static_cast<std::uint32_t>(locs_.size());
          locs_.push_back(loc);
          sizes_.push_back(1);
        }
        assign_[i] = slot;
        ++active_;
      }
    }
  }

  struct LocationStats {
    std::size_t accepted;
    std::size_t moves;
    double loglik;
  };

  LocationStats update_locations() {
    // Bucket members by cluster slot.
    const std::size_t slots = locs_.size();
    offsets_.assign(slots + 1, 0);
    for (auto a : assign_) ++offsets_[a + 1];
    for (std::size_t c = 0; c < slots; ++c) offsets_[c + 1] += offsets_[c];
    members_.resize(x_.size());
    cursor_.assign(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < x_.size(); ++i) members_[cursor_[assign_[i]]++] = x_[i];

    std::size_t accepted = 0, moves = 0;
    double loglik = 0.0;
    for (std::size_t c = 0; c < slots; ++c) {
      if (sizes_[c] == 0) continue;
      const auto begin = members_.begin() + static_cast<std::ptrdiff_t>(offsets_[c]);
      const auto end = members_.begin() + static_cast<std::ptrdiff_t>(offsets_[c + 1]);
      auto abs_dev = [&](double phi) {
        double s = 0.0;
        for (auto m = begin; m != end; ++m) s += std::abs(*m - phi);
        return s;
      };
      const double cur = locs_[c];
      double cur_dev = abs_dev(cur);
      const double prop = cur + step_ * rng_.normal();
      const double prop_dev = abs_dev(prop);
      const double log_ratio =
          base_log_density(prior_, prop) - prop_dev - base_log_density(prior_, cur) + cur_dev;
      ++moves;
      if (log_ratio >= 0.0 || rng_.uniform() < std::exp(log_ratio)) {
        locs_[c] = prop;
        cur_dev = prop_dev;
        ++accepted;
      }
      loglik -= cur_dev;
    }
    loglik -= static_cast<double>(x_.size()) * std::numbers::ln2;
    return {accepted, moves, loglik};
  }

  PosteriorSample snapshot() const {
    PosteriorSample s;
    std::vector<std::uint32_t> relabel(locs_.size(), 0);
    for (std::size_t c = 0; c < locs_.size(); ++c) {
      if (sizes_[c] == 0) continue;
      relabel[c] = static_cast<std::uint32_t>(s.cluster_locations.size());
      s.cluster_locations.push_back(locs_[c]);
      s.cluster_sizes.push_back(sizes_[c]);
    }
    s.assignments.resize(assign_.size());
    for (std::size_t i = 0; i < assign_.size(); ++i) s.assignments[i] = relabel[assign_[i]];
    return s;
  }

  std::vector<double> x_;
  DpPrior prior_;
  McmcConfig cfg_;
  CounterRng rng_;
  double step_;

  std::vector<std::uint32_t> assign_;
  std::vector<double> locs_;
  std::vector<std::uint32_t> sizes_;
  std::vector<std::uint32_t> free_;
  std::size_t active_ = 1;

  std::vector<double> aux_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> cursor_;
  std::vector<double> members_;
};

}  // namespace

ChainTrace run_chain(std::span<const double> x, const DpPrior& prior, const McmcConfig& cfg,
                     const std::function<void(const PosteriorSample&)>& on_draw) {
  if (x.empty()) throw std::invalid_argument("run_chain: empty data");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("run_chain: non-finite observation");
  prior.validate();
  cfg.validate();
  return DpLaplaceChain(x, prior, cfg).run(on_draw);
}

ChainResult run_chain(std::span<const double> x, const DpPrior& prior, const McmcConfig& cfg) {
  ChainResult out;
  out.trace = run_chain(x, prior, cfg, [&](const PosteriorSample& s) { out.draws.push_back(s); });
  return out;
}

// ---------------------------------------------------------------------------
// Posterior summaries

GridSpec default_bayes_grid(std::span<const double> x, const DpPrior& prior) {
  if (x.empty()) throw std::invalid_argument("default_bayes_grid: empty data");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double t = prior.base_half_width();
  return GridSpec::padded(std::min(*lo, -t), std::max(*hi, t));
}

namespace {

// (alpha' * f)(t) at every grid point via the two-sided exponential recursion,
// with 4-point Gauss-Legendre on each cell.
std::vector<double> base_convolved_density(const DpPrior& prior, const std::vector<double>& pts) {
  using Gauss = boost::math::quadrature::gauss<double, 4>;
  const auto& ax = Gauss::abscissa();
  const auto& aw = Gauss::weights();
  const std::size_t m = pts.size();
  std::vector<double> left(m, 0.0), right(m, 0.0);
  auto cell = [&](double a, double b, auto&& kernel) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double y = mid + sign * half * ax[i];
        s += aw[i] * base_density(prior, y) * kernel(y);
      }
    }
    return half * s;
  };
  for (std::size_t k = 1; k < m; ++k) {
    const double a = pts[k - 1], b = pts[k];
    left[k] = left[k - 1] * std::exp(-(b - a)) + cell(a, b, [&](double y) { return std::exp(-(b - y)); });
  }
  for (std::size_t k = m - 1; k-- > 0;) {
    const double a = pts[k], b = pts[k + 1];
    right[k] = right[k + 1] * std::exp(-(b - a)) + cell(a, b, [&](double y) { return std::exp(-(y - a)); });
  }
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = 0.5 * (left[k] + right[k]);
  return out;
}

}  // namespace

BayesAccumulator::BayesAccumulator(std::span<const double> x, const DpPrior& prior)
    : x_(x.begin(), x.end()), prior_(prior) {
  prior_.validate();
}

void BayesAccumulator::add(const PosteriorSample& draw) {
  if (draw.assignments.size() != x_.size()) throw std::invalid_argument("BayesAccumulator: draw size mismatch");
  for (std::size_t c = 0; c < draw.cluster_locations.size(); ++c)
    atoms_.emplace_back(draw.cluster_locations[c], static_cast<double>(draw.cluster_sizes[c]));
  double ll = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i)
    ll += std::log(laplace_pdf(x_[i] - draw.cluster_locations[draw.assignments[i]]));
  loglik_.push_back(ll);
}

std::pair<std::vector<double>, std::vector<double>> BayesAccumulator::pooled_atoms() const {
  auto sorted = atoms_;
  std::sort(sorted.begin(), sorted.end());
  const double scale =
      1.0 / ((prior_.total_mass + static_cast<double>(x_.size())) * static_cast<double>(loglik_.size()));
  std::vector<double> locs, weights;
  locs.reserve(sorted.size());
  weights.reserve(sorted.size());
  for (const auto& [loc, size] : sorted) {
    if (!locs.empty() && locs.back() == loc) {
      weights.back() += size * scale;
    } else {
      locs.push_back(loc);
      weights.push_back(size * scale);
    }
  }
  return {std::move(locs), std::move(weights)};
}

BayesEstimates BayesAccumulator::finish(const GridSpec& grid) const {
  if (loglik_.empty()) throw std::invalid_argument("bayes_estimates: no draws");
  const auto pts = grid.points();
  const double base_share = prior_.total_mass / (prior_.total_mass + static_cast<double>(x_.size()));
  const auto [locs, weights] = pooled_atoms();
  const auto sweep = laplace_sweep(locs, weights, pts);
  const auto conv = base_convolved_density(prior_, pts);

  std::vector<double> density(pts.size()), cdf(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    density[k] = base_share * conv[k] + 0.5 * (sweep.left[k] + sweep.right[k]);
    cdf[k] = std::min(1.0, base_share * base_cdf(prior_, pts[k]) + sweep.mass_left[k]);
    if (k > 0) cdf[k] = std::max(cdf[k], cdf[k - 1]);
  }
  cdf.back() = 1.0;
  return BayesEstimates{DensityGrid(grid, std::move(density)), StepCdf(pts, std::move(cdf)),
                        effective_sample_size(loglik_), loglik_.size()};
}

BayesEstimates bayes_estimates(const std::vector<PosteriorSample>& draws, std::span<const double> x,
                               const DpPrior& prior, std::optional<GridSpec> grid) {
  if (draws.empty()) throw std::invalid_argument("bayes_estimates: empty draw list");
  BayesAccumulator acc(x, prior);
  for (const auto& d : draws) acc.add(d);
  return acc.finish(grid.value_or(default_bayes_grid(x, prior)));
}

double predictive_mgf(const PosteriorSample& draw, std::size_t n, const DpPrior& prior, double s) {
  const double base = base_mgf(prior, s);
  if (s == 0.0) return 1.0;
  double sum = prior.total_mass * base;
  for (std::size_t c = 0; c < draw.cluster_locations.size(); ++c)
    sum += draw.cluster_sizes[c] * std::exp(s * draw.cluster_locations[c]);
  return sum / (prior.total_mass + static_cast<double>(n));
}

double posterior_mgf(const std::vector<PosteriorSample>& draws, std::span<const double> x, const DpPrior& prior,
                     double s) {
  if (draws.empty()) throw std::invalid_argument("posterior_mgf: empty draw list");
  base_mgf(prior, s);  // domain guard
  double total = 0.0;
  for (const auto& d : draws) total += predictive_mgf(d, x.size(), prior, s);
  return total / static_cast<double>(draws.size());
}

double effective_sample_size(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (trace[i] - mean) * (trace[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

}  // namespace lapdecon
