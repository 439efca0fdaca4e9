#include "lapdecon/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "nnls.hpp"
#include "lapdecon/parallel.hpp"

namespace lapdecon {

ResolvedSolverConfig resolve(const SolverConfig& cfg, std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("npmle: empty data");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("npmle: non-finite observation");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  ResolvedSolverConfig r{};
  r.grid_pad = cfg.grid_pad;
  r.grid_step = cfg.grid_step.value_or(range > 0.0 ? std::min(0.01, range / 2000.0) : 0.01);
  r.em_tol = cfg.em_tol;
  r.grad_tol = cfg.grad_tol.value_or(1e-6 * static_cast<double>(x.size()));
  r.max_iter = cfg.max_iter;
  r.prune_weight = cfg.prune_weight;
  if (!(r.grid_pad > 0.0) || !(r.grid_step > 0.0) || !(r.em_tol > 0.0) || !(r.prune_weight > 0.0) ||
      r.max_iter == 0)
    throw std::invalid_argument("npmle: solver settings must be positive");
  if (!(r.grad_tol >= 1e-10)) throw std::invalid_argument("npmle: grad_tol must be >= 1e-10");
  return r;
}

double gradient_function(const DiscreteDistribution& g, std::span<const double> x, double y) {
  const MixtureDensity m(g);
  double s = 0.0;
  for (double xi : x) s += laplace_pdf(xi - y) / m.pdf(xi);
  return s - static_cast<double>(x.size());
}

std::vector<double> candidate_locations(std::span<const double> x, const ResolvedSolverConfig& cfg) {
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it - cfg.grid_pad;
  const double hi = *hi_it + cfg.grid_pad;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / cfg.grid_step - 1e-9)) + 1;

  std::vector<double> data(x.begin(), x.end());
  std::sort(data.begin(), data.end());
  data.erase(std::unique(data.begin(), data.end()), data.end());

  std::vector<double> out;
  out.reserve(count + data.size());
  std::size_t d = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double g = lo + cfg.grid_step * static_cast<double>(k);
    while (d < data.size() && data[d] <= g + kAtomMergeTol) out.push_back(data[d++]);
    if (out.empty() || g - out.back() > kAtomMergeTol) out.push_back(g);
  }
  while (d < data.size()) out.push_back(data[d++]);
  return out;
}

namespace {

// Constrained Newton iterations: each step maximizes a quadratic model of the
// log-likelihood over nonnegative weights on the current support plus the
// local maxima of the gradient function, then line-searches between the old
// and new weights. A step that cannot raise the likelihood ends the run.
class NpmleSolver {
 public:
  NpmleSolver(std::span<const double> x, const ResolvedSolverConfig& cfg)
      : cfg_(cfg), x_(x.begin(), x.end()), n_(static_cast<double>(x.size())) {
    std::sort(x_.begin(), x_.end());
    candidates_ = candidate_locations(x_, cfg_);
    p_.assign(x_.size(), 0.0);
  }

  NpmleResult solve() {
    // Start from a point mass at the candidate nearest the sample median.
    const double median = x_[x_.size() / 2];
    const auto it = std::lower_bound(candidates_.begin(), candidates_.end(), median);
    support_ = {static_cast<std::size_t>(it - candidates_.begin())};
    weights_ = {1.0};
    refresh();
    trace_.push_back(loglik_);

    bool converged = false;
    double sup = 0.0;
    while (true) {
      prune();
      const auto grad = gradient_on_candidates();
      std::size_t best = 0;
      sup = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < grad.size(); ++c)
        if (grad[c] > sup) {  // strict: ties keep the smallest location
          sup = grad[c];
          best = c;
        }
      double worst_atom = 0.0;
      for (std::size_t j : support_) worst_atom = std::max(worst_atom, std::abs(grad[j]));
      if (sup <= cfg_.grad_tol && worst_atom <= 10.0 * cfg_.grad_tol) {
        converged = true;
        break;
      }
      if (iterations_ >= cfg_.max_iter) break;
      if (!newton_step(best, grad)) break;
    }

    std::vector<double> atoms, weights;
    for (std::size_t j = 0; j < support_.size(); ++j) {
      atoms.push_back(candidates_[support_[j]]);
      weights.push_back(weights_[j]);
    }
    return NpmleResult{DiscreteDistribution::from_unnormalized(std::move(atoms), std::move(weights)),
                       loglik_,
                       sup,
                       iterations_,
                       converged,
                       std::move(trace_)};
  }

 private:
  double column(std::size_t i, std::size_t cand) const { return laplace_pdf(x_[i] - candidates_[cand]); }

  static std::vector<double> mixture(const std::vector<double>& x, const std::vector<double>& locs,
                                     const std::vector<double>& ws) {
    const auto sw = laplace_sweep(locs, ws, x);
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.5 * (sw.left[i] + sw.right[i]);
    return p;
  }

  std::vector<double> locations(const std::vector<std::size_t>& support) const {
    std::vector<double> out(support.size());
    for (std::size_t j = 0; j < support.size(); ++j) out[j] = candidates_[support[j]];
    return out;
  }

  static double log_sum(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) s += std::log(v);
    return s;
  }

  void refresh() {
    p_ = mixture(x_, locations(support_), weights_);
    loglik_ = log_sum(p_);
  }

  // Drops atoms below prune_weight unless that would lower the likelihood.
  void prune() {
    if (support_.size() <= 1) return;
    std::vector<std::size_t> keep_s;
    std::vector<double> keep_w;
    for (std::size_t j = 0; j < support_.size(); ++j)
      if (weights_[j] >= cfg_.prune_weight) {
        keep_s.push_back(support_[j]);
        keep_w.push_back(weights_[j]);
      }
    if (keep_s.size() == support_.size() || keep_s.empty()) return;
    const double total = std::accumulate(keep_w.begin(), keep_w.end(), 0.0);
    for (double& w : keep_w) w /= total;
    const auto p = mixture(x_, locations(keep_s), keep_w);
    const double ll = log_sum(p);
    if (ll < loglik_) return;
    support_ = std::move(keep_s);
    weights_ = std::move(keep_w);
    p_ = p;
    loglik_ = ll;
    trace_.push_back(loglik_);
  }

  std::vector<double> gradient_on_candidates() const {
    std::vector<double> inv(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) inv[i] = 1.0 / p_[i];
    const auto sw = laplace_sweep(x_, inv, candidates_);
    std::vector<double> d(candidates_.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = 0.5 * (sw.left[c] + sw.right[c]) - n_;
    return d;
  }

  bool newton_step(std::size_t best, const std::vector<double>& grad) {
    // Working set: current support plus positive local maxima of D.
    std::vector<std::size_t> work = support_;
    const std::size_t m = grad.size();
    for (std::size_t c = 0; c < m; ++c) {
      if (grad[c] <= 0.0) continue;
      const bool left_ok = c == 0 || grad[c] > grad[c - 1];
      const bool right_ok = c + 1 == m || grad[c] >= grad[c + 1];
      if ((left_ok && right_ok) || c == best) work.push_back(c);
    }
    std::sort(work.begin(), work.end());
    work.erase(std::unique(work.begin(), work.end()), work.end());

    const auto rows = static_cast<Eigen::Index>(x_.size());
    const auto cols = static_cast<Eigen::Index>(work.size());
    // Quadratic model of l(w) - n (sum w - 1) around the current mixture:
    // maximize D'w - 0.5 ||S w - 1||^2 over w >= 0, S_ij = f(x_i - y_j) / p_i.
    // The multiplier makes the simplex constraint hold at the optimum.
    Eigen::MatrixXd s(rows, cols);
    Eigen::VectorXd d(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::size_t c = work[static_cast<std::size_t>(j)];
      d(j) = grad[c];
      for (Eigen::Index i = 0; i < rows; ++i)
        s(i, j) = column(static_cast<std::size_t>(i), c) / p_[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd linear = s.transpose() * Eigen::VectorXd::Ones(rows) + d;
    Eigen::VectorXd w_new = detail::nonneg_qp(s.transpose() * s, linear);
    const double total = w_new.sum();
    if (!(total > 0.0)) return false;
    w_new /= total;

    Eigen::VectorXd w_old = Eigen::VectorXd::Zero(cols);
    for (std::size_t j = 0; j < support_.size(); ++j) {
      const auto pos = std::lower_bound(work.begin(), work.end(), support_[j]) - work.begin();
      w_old(pos) = weights_[j];
    }
    const Eigen::VectorXd dir = w_new - w_old;
    // Directional derivative of the log-likelihood along dir.
    const double slope = (s.transpose() * Eigen::VectorXd::Ones(rows)).dot(dir);

    const auto locs = locations(work);
    std::vector<double> trial(work.size());
    double alpha = 1.0;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      for (std::size_t j = 0; j < trial.size(); ++j)
        trial[j] = std::max(0.0, w_old(static_cast<Eigen::Index>(j)) + alpha * dir(static_cast<Eigen::Index>(j)));
      const auto p = mixture(x_, locs, trial);
      const double ll = log_sum(p);
      if (std::isfinite(ll) && ll >= loglik_ + alpha * slope / 3.0 && ll > loglik_) {
        support_.clear();
        weights_.clear();
        const double sum = std::accumulate(trial.begin(), trial.end(), 0.0);
        for (std::size_t j = 0; j < work.size(); ++j)
          if (trial[j] > 0.0) {
            support_.push_back(work[j]);
            weights_.push_back(trial[j] / sum);
          }
        refresh();
        ++iterations_;
        trace_.push_back(loglik_);
        return true;
      }
    }
    return false;
  }

  ResolvedSolverConfig cfg_;
  std::vector<double> x_;
  double n_;
  std::vector<double> candidates_;
  std::vector<std::size_t> support_;  // sorted candidate indices
  std::vector<double> weights_;
  std::vector<double> p_;
  double loglik_ = 0.0;
  std::size_t iterations_ = 0;
  std::vector<double> trace_;
};

}  // namespace

NpmleResult fit_npmle(std::span<const double> x, const SolverConfig& cfg) {
  const auto resolved = resolve(cfg, x);
  return NpmleSolver(x, resolved).solve();
}

double mgf(const DiscreteDistribution& g, double s) {
  if (s == 0.0) return 1.0;
  double m = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) m += g.weights()[j] * std::exp(s * g.atoms()[j]);
  return m;
}

std::vector<MgfDiagnosticRow> mgf_bias_diagnostic(const GroundTruthSpec& spec, const std::vector<double>& s_grid,
                                                  std::size_t n, std::size_t reps, const SolverConfig& cfg) {
  if (reps == 0 || n == 0) throw std::invalid_argument("mgf_bias_diagnostic: n and reps must be positive");
  for (double s : s_grid)
    if (!(s > -1.0 && s < 1.0)) throw std::invalid_argument("mgf_bias_diagnostic: s must lie in (-1, 1)");
  const auto g0 = spec.mixing();

  std::vector<std::vector<double>> values(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto data = sample(g0, n, derive_seed(spec.seed, r));
    const auto fit = fit_npmle(data.x, cfg);
    auto& row = values[r];
    for (double s : s_grid) row.push_back(mgf(fit.g_hat, s));
  });

  std::vector<MgfDiagnosticRow> out;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    double mean = 0.0;
    for (const auto& v : values) mean += v[k];
    mean /= static_cast<double>(reps);
    MgfDiagnosticRow row{s_grid[k], mean, std::nullopt, mgf(g0, s_grid[k])};
    if (reps > 1) {
      double ss = 0.0;
      for (const auto& v : values) ss += (v[k] - mean) * (v[k] - mean);
      row.std_error = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace lapdecon
