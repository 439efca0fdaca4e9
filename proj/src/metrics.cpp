#include "lapdecon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lapdecon/quadrature.hpp"

namespace lapdecon {

namespace {

constexpr double kDensityFloor = 1e-300;

template <typename Integrand>
double integrate_pair(const MixtureDensity& p, const MixtureDensity& q, Integrand&& fn) {
  std::vector<double> breaks(p.mixing().atoms().begin(), p.mixing().atoms().end());
  breaks.insert(breaks.end(), q.mixing().atoms().begin(), q.mixing().atoms().end());
  const double lo = std::min(p.window_lo(), q.window_lo());
  const double hi = std::max(p.window_hi(), q.window_hi());
  const auto rule = composite_gauss(breaks, lo, hi);
  const auto pv = p.pdf_sorted(rule.nodes);
  const auto qv = q.pdf_sorted(rule.nodes);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * fn(pv[i], qv[i]);
  return s;
}

template <typename Integrand>
double integrate_pair(const DensityGrid& p, const DensityGrid& q, Integrand&& fn) {
  if (!p.grid().same_as(q.grid())) throw std::invalid_argument("density grids do not match");
  const auto pv = p.values();
  const auto qv = q.values();
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += fn(pv[i], qv[i]);
  return s * p.grid().step;
}

double hellinger_integrand(double a, double b) {
  const double d = std::sqrt(std::max(a, 0.0)) - std::sqrt(std::max(b, 0.0));
  return d * d;
}

double kl_integrand(double a, double b) {
  if (a < kDensityFloor) return 0.0;
  if (!(b > 0.0)) throw std::domain_error("kl_divergence: nonpositive density where p0 > 0");
  return a * std::log(a / b);
}

}  // namespace

double hellinger(const MixtureDensity& p, const MixtureDensity& q) {
  return std::sqrt(std::max(0.0, integrate_pair(p, q, hellinger_integrand)));
}
double hellinger(const DensityGrid& p, const DensityGrid& q) {
  return std::sqrt(std::max(0.0, integrate_pair(p, q, hellinger_integrand)));
}

// Between consecutive atoms p - q = alpha e^s + beta e^{-s} (s measured from
// the left atom), which has at most one sign change, so |p - q| integrates in
// closed form.
double l1_distance(const MixtureDensity& p, const MixtureDensity& q) {
  std::vector<double> ys, ws;
  for (const auto& [m, sign] : {std::pair{&p, 0.5}, std::pair{&q, -0.5}}) {
    const auto& g = m->mixing();
    for (std::size_t j = 0; j < g.size(); ++j) {
      ys.push_back(g.atoms()[j]);
      ws.push_back(sign * g.weights()[j]);
    }
  }
  std::vector<std::size_t> order(ys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
  std::vector<double> sy, sw;
  for (std::size_t i : order) {
    sy.push_back(ys[i]);
    sw.push_back(ws[i]);
  }
  std::vector<double> cuts = sy;
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto sweep = laplace_sweep(sy, sw, cuts);

  // Outer tails: a single exponential each.
  double total = std::abs(sweep.left.front() + sweep.right.front()) + std::abs(sweep.left.back());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double beta = sweep.left[k];
    const double alpha = sweep.right[k];
    const double len = cuts[k + 1] - cuts[k];
    auto antideriv = [&](double s) { return alpha * std::exp(s) - beta * std::exp(-s); };
    if (alpha != 0.0 && beta != 0.0 && (alpha > 0.0) != (beta > 0.0)) {
      const double root = 0.5 * std::log(-beta / alpha);
      if (root > 0.0 && root < len) {
        total += std::abs(antideriv(root) - antideriv(0.0)) + std::abs(antideriv(len) - antideriv(root));
        continue;
      }
    }
    total += std::abs(antideriv(len) - antideriv(0.0));
  }
  return total;
}
double l1_distance(const DensityGrid& p, const DensityGrid& q) {
  return integrate_pair(p, q, [](double a, double b) { return std::abs(a - b); });
}

double l2_distance(const MixtureDensity& p, const MixtureDensity& q) {
  return std::sqrt(integrate_pair(p, q, [](double a, double b) { return (a - b) * (a - b); }));
}
double l2_distance(const DensityGrid& p, const DensityGrid& q) {
  return std::sqrt(integrate_pair(p, q, [](double a, double b) { return (a - b) * (a - b); }));
}

// Both KL and V_k are clamped at zero: the exact values are nonnegative and
// quadrature round-off can dip below by ~1e-17 when p0 == q.
double kl_divergence(const MixtureDensity& p0, const MixtureDensity& q) {
  return std::max(0.0, integrate_pair(p0, q, kl_integrand));
}
double kl_divergence(const DensityGrid& p0, const DensityGrid& q) {
  return std::max(0.0, integrate_pair(p0, q, kl_integrand));
}

namespace {
auto v_integrand(int k) {
  if (k < 2) throw std::invalid_argument("v_moment: k must be >= 2");
  return [k](double a, double b) {
    if (a < kDensityFloor) return 0.0;
    if (!(b > 0.0)) throw std::domain_error("v_moment: nonpositive density where p0 > 0");
    return a * std::pow(std::abs(std::log(a / b)), k);
  };
}
}  // namespace

double v_moment(const MixtureDensity& p0, const MixtureDensity& q, int k) {
  return integrate_pair(p0, q, v_integrand(k));
}
double v_moment(const DensityGrid& p0, const DensityGrid& q, int k) {
  return integrate_pair(p0, q, v_integrand(k));
}

// ---------------------------------------------------------------------------
// Wasserstein

double w1_distance(const StepCdf& g1, const StepCdf& g2) {
  const auto k1 = g1.knots();
  const auto k2 = g2.knots();
  const auto v1 = g1.values();
  const auto v2 = g2.values();
  std::size_t i = 0, j = 0;
  double c1 = 0.0, c2 = 0.0;
  double prev = std::min(k1.front(), k2.front());
  double total = 0.0;
  while (i < k1.size() || j < k2.size()) {
    const double t1 = i < k1.size() ? k1[i] : std::numeric_limits<double>::infinity();
    const double t2 = j < k2.size() ? k2[j] : std::numeric_limits<double>::infinity();
    const double t = std::min(t1, t2);
    total += std::abs(c1 - c2) * (t - prev);
    if (t1 == t) c1 = v1[i++];
    if (t2 == t) c2 = v2[j++];
    prev = t;
  }
  return total;
}

double wp_distance(const StepCdf& g1, const StepCdf& g2, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("wp_distance: p must be >= 1");
  const auto k1 = g1.knots();
  const auto k2 = g2.knots();
  const auto v1 = g1.values();
  const auto v2 = g2.values();
  std::size_t i = 0, j = 0;
  double u_prev = 0.0;
  double total = 0.0;
  while (true) {
    while (i < v1.size() && v1[i] <= u_prev) ++i;
    while (j < v2.size() && v2[j] <= u_prev) ++j;
    if (i == v1.size() || j == v2.size()) break;
    const double u = std::min(v1[i], v2[j]);
    const double gap = std::abs(k1[i] - k2[j]);
    total += (p == 1.0 ? gap : std::pow(gap, p)) * (u - u_prev);
    u_prev = u;
  }
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

double w1_distance(const DiscreteDistribution& g1, const DiscreteDistribution& g2) {
  return w1_distance(StepCdf::from_discrete(g1), StepCdf::from_discrete(g2));
}

// ---------------------------------------------------------------------------
// Inequalities

InequalityReport InequalityReport::make(double lhs, double rhs) {
  InequalityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.satisfied = r.slack >= -1e-10;
  return r;
}

InequalityReport l2_hellinger_bound_check(const MixtureDensity& m1, const MixtureDensity& m2) {
  const double l2 = l2_distance(m1, m2);
  const double h = hellinger(m1, m2);
  return InequalityReport::make(l2 * l2, 4.0 * kLaplaceSup * h * h);
}

std::string to_string(DistanceKind k) { return k == DistanceKind::l2 ? "l2" : "hellinger"; }

InequalityReport inversion_inequality_check(const DiscreteDistribution& g1, const DiscreteDistribution& g2,
                                            double p, DistanceKind kind, double constant) {
  if (!(p >= 1.0)) throw std::invalid_argument("inversion_inequality_check: p must be >= 1");
  constexpr double beta = 2.0;
  const MixtureDensity m1(g1), m2(g2);
  const double d = kind == DistanceKind::l2 ? l2_distance(m1, m2) : hellinger(m1, m2);
  const double w = wp_distance(StepCdf::from_discrete(g1), StepCdf::from_discrete(g2), p);

  if (d >= std::exp(-1.0)) {
    InequalityReport r = InequalityReport::make(w, std::numeric_limits<double>::infinity());
    r.applicable = false;
    r.implied_constant = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double rate =
      d > 0.0 ? std::pow(d, 1.0 / (p + beta)) * std::pow(std::log(1.0 / d), (p + 0.5) / (p + beta)) : 0.0;
  InequalityReport r = InequalityReport::make(w, constant * rate);
  r.implied_constant = rate > 0.0 ? w / rate : (w == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace lapdecon
