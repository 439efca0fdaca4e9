#include "lapdecon/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "lapdecon/deconv.hpp"
#include "lapdecon/metrics.hpp"
#include "lapdecon/parallel.hpp"

namespace lapdecon {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::npmle: return "npmle";
    case Estimator::bayes: return "bayes";
    case Estimator::deconv: return "deconv";
  }
  return "unknown";
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::hellinger: return "hellinger";
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
    case Metric::w1: return "w1";
  }
  return "unknown";
}

Estimator estimator_from_string(const std::string& s) {
  if (s == "npmle") return Estimator::npmle;
  if (s == "bayes") return Estimator::bayes;
  if (s == "deconv") return Estimator::deconv;
  throw std::invalid_argument("unknown estimator: " + s);
}

Metric metric_from_string(const std::string& s) {
  if (s == "hellinger") return Metric::hellinger;
  if (s == "l1") return Metric::l1;
  if (s == "l2") return Metric::l2;
  if (s == "w1") return Metric::w1;
  throw std::invalid_argument("unknown metric: " + s);
}

void ExperimentPlan::validate() const {
  ground_truth.validate();
  if (n_grid.empty()) throw std::invalid_argument("plan: empty n_grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw std::invalid_argument("plan: n must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("plan: n_grid must increase");
  }
  if (reps == 0) throw std::invalid_argument("plan: reps must be positive");
  if (estimators.empty() || metrics.empty()) throw std::invalid_argument("plan: no estimators or metrics");
  prior.validate();
  mcmc.validate();
  if (!(deconv_constant > 0.0)) throw std::invalid_argument("plan: deconv constant must be positive");
}

McmcConfig scaled_mcmc(const McmcConfig& base, std::size_t n) {
  McmcConfig cfg = base;
  cfg.iterations = std::max(base.iterations, 10 * n);
  cfg.burn_in = base.burn_in * cfg.iterations / base.iterations;
  return cfg;
}

// ---------------------------------------------------------------------------
// Slopes

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

SlopeFit fit_slope_points(const std::vector<std::pair<double, double>>& n_and_error) {
  const std::size_t k = n_and_error.size();
  if (k < 2) throw std::invalid_argument("fit_slope: insufficient points");
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(n_and_error[i].first > 0.0) || !(n_and_error[i].second > 0.0))
      throw std::invalid_argument("fit_slope: n and error must be positive");
    lx[i] = std::log(n_and_error[i].first);
    ly[i] = std::log(n_and_error[i].second);
  }
  // Means anchored at the first point so constant inputs centre exactly.
  auto anchored_mean = [k](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e - v[0];
    return v[0] + s / static_cast<double>(k);
  };
  const double mx = anchored_mean(lx);
  const double my = anchored_mean(ly);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: need distinct n values");
  SlopeFit fit{};
  fit.points = k;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  fit.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ssr / syy) : 0.0;
  if (k > 2) {
    fit.stderr_slope = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
    if (fit.stderr_slope > 0.0) {
      boost::math::students_t dist(static_cast<double>(k - 2));
      fit.p_negative = boost::math::cdf(dist, fit.slope / fit.stderr_slope);
    } else {
      fit.p_negative = fit.slope < 0.0 ? 0.0 : (fit.slope > 0.0 ? 1.0 : 0.5);
    }
  } else {
    fit.stderr_slope = std::numeric_limits<double>::quiet_NaN();
    fit.p_negative = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

SlopeFit fit_slope(const std::vector<RateRecord>& records, Estimator e, Metric m) {
  std::vector<std::size_t> ns;
  for (const auto& r : records)
    if (r.estimator == e && r.metric == m && r.valid) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : ns) {
    std::vector<double> errs;
    for (const auto& r : records)
      if (r.estimator == e && r.metric == m && r.valid && r.n == n) errs.push_back(r.error);
    const double med = median(std::move(errs));
    if (med > 0.0) pts.emplace_back(static_cast<double>(n), med);
  }
  if (pts.size() < 4) throw std::invalid_argument("fit_slope: insufficient points (need 4 distinct n)");
  return fit_slope_points(pts);
}

double RateTable::invalid_fraction() const {
  if (records.empty()) return 0.0;
  const auto bad = std::count_if(records.begin(), records.end(), [](const RateRecord& r) { return !r.valid; });
  return static_cast<double>(bad) / static_cast<double>(records.size());
}

std::vector<std::pair<std::size_t, double>> RateTable::medians(Estimator e, Metric m) const {
  std::vector<std::size_t> ns;
  for (const auto& r : records)
    if (r.estimator == e && r.metric == m && (ns.empty() || ns.back() != r.n)) ns.push_back(r.n);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t n : ns) {
    std::vector<double> errs;
    for (const auto& r : records)
      if (r.estimator == e && r.metric == m && r.valid && r.n == n) errs.push_back(r.error);
    if (!errs.empty()) out.emplace_back(n, median(std::move(errs)));
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> MergingTable::medians() const {
  std::vector<std::size_t> ns;
  for (const auto& r : rows)
    if (ns.empty() || ns.back() != r.n) ns.push_back(r.n);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t n : ns) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.n == n) v.push_back(r.w1_bayes_npmle);
    out.emplace_back(n, median(std::move(v)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Study

namespace {

struct Truth {
  DiscreteDistribution g0;
  MixtureDensity p0;
  StepCdf cdf;
};

struct ReplicateOutput {
  std::vector<RateRecord> records;
  std::optional<MergingRow> merging;
};

bool density_metric(Metric m) { return m != Metric::w1; }

double density_error(Metric m, const MixtureDensity& est, const MixtureDensity& truth) {
  switch (m) {
    case Metric::hellinger: return hellinger(est, truth);
    case Metric::l1: return l1_distance(est, truth);
    case Metric::l2: return l2_distance(est, truth);
    case Metric::w1: break;
  }
  throw std::logic_error("not a density metric");
}

double density_error(Metric m, const DensityGrid& est, const DensityGrid& truth) {
  switch (m) {
    case Metric::hellinger: return hellinger(est, truth);
    case Metric::l1: return l1_distance(est, truth);
    case Metric::l2: return l2_distance(est, truth);
    case Metric::w1: break;
  }
  throw std::logic_error("not a density metric");
}

ReplicateOutput run_replicate(const ExperimentPlan& plan, const Truth& truth, std::size_t n_index,
                              std::size_t rep) {
  const std::size_t n = plan.n_grid[n_index];
  const std::uint64_t seed = derive_seed(plan.master_seed, n_index, rep);
  const auto data = sample(truth.g0, n, seed);

  ReplicateOutput out;
  std::optional<StepCdf> npmle_cdf, bayes_cdf;

  for (Estimator e : plan.estimators) {
    std::vector<RateRecord> recs;
    for (Metric m : plan.metrics) {
      if (e == Estimator::deconv && density_metric(m)) continue;  // estimates the mixing law only
      recs.push_back({e, m, n, rep, std::numeric_limits<double>::quiet_NaN(), seed, false});
    }
    try {
      switch (e) {
        case Estimator::npmle: {
          const auto fit = fit_npmle(data.x, plan.npmle);
          const MixtureDensity est(fit.g_hat);
          npmle_cdf = StepCdf::from_discrete(fit.g_hat);
          for (auto& r : recs)
            r.error = r.metric == Metric::w1 ? w1_distance(*npmle_cdf, truth.cdf)
                                             : density_error(r.metric, est, truth.p0);
          break;
        }
        case Estimator::bayes: {
          McmcConfig cfg = scaled_mcmc(plan.mcmc, n);
          cfg.seed = derive_seed(plan.master_seed, n_index, rep, 1);
          BayesAccumulator acc(data.x, plan.prior);
          run_chain(data.x, plan.prior, cfg, [&](const PosteriorSample& s) { acc.add(s); });
          const auto grid = default_bayes_grid(data.x, plan.prior);
          auto est = acc.finish(grid);
          bayes_cdf = est.mean_cdf;
          std::optional<DensityGrid> p0_grid;
          for (auto& r : recs) {
            if (r.metric == Metric::w1) {
              r.error = w1_distance(est.mean_cdf, truth.cdf);
            } else {
              if (!p0_grid) p0_grid = to_grid(truth.p0, grid);
              r.error = density_error(r.metric, est.mean_density, *p0_grid);
            }
          }
          break;
        }
        case Estimator::deconv: {
          const DeconvConfig cfg{default_bandwidth(n, plan.deconv_constant), std::nullopt};
          const auto cdf = deconv_cdf(data.x, cfg);
          for (auto& r : recs) r.error = w1_distance(cdf, truth.cdf);
          break;
        }
      }
      for (auto& r : recs) r.valid = std::isfinite(r.error);
    } catch (const std::exception&) {
      for (auto& r : recs) {
        r.valid = false;
        r.error = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }

  if (npmle_cdf && bayes_cdf) {
    MergingRow row{n, rep, w1_distance(*bayes_cdf, *npmle_cdf), w1_distance(*bayes_cdf, truth.cdf),
                   w1_distance(*npmle_cdf, truth.cdf), false};
    row.triangle_ok = row.w1_bayes_npmle <= row.w1_bayes_truth + row.w1_npmle_truth + 1e-12;
    out.merging = row;
  }
  return out;
}

}  // namespace

StudyResult run_study(const ExperimentPlan& plan) {
  plan.validate();
  const auto g0 = plan.ground_truth.mixing();
  const Truth truth{g0, MixtureDensity(g0), StepCdf::from_discrete(g0)};

  const std::size_t tasks = plan.n_grid.size() * plan.reps;
  std::vector<ReplicateOutput> outputs(tasks);
  // Largest n first so long tasks do not trail at the end of the pool.
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t slot = tasks - 1 - t;
    outputs[slot] = run_replicate(plan, truth, slot / plan.reps, slot % plan.reps);
  });

  StudyResult result;
  const bool merging = std::count(plan.estimators.begin(), plan.estimators.end(), Estimator::npmle) > 0 &&
                       std::count(plan.estimators.begin(), plan.estimators.end(), Estimator::bayes) > 0;
  if (merging) result.merging.emplace();
  for (auto& o : outputs) {
    result.rates.records.insert(result.rates.records.end(), o.records.begin(), o.records.end());
    if (merging && o.merging) result.merging->rows.push_back(*o.merging);
  }

  if (plan.n_grid.size() >= 4) {
    for (Estimator e : plan.estimators)
      for (Metric m : plan.metrics) {
        if (e == Estimator::deconv && density_metric(m)) continue;
        try {
          result.rates.slopes.push_back({e, m, fit_slope(result.rates.records, e, m)});
        } catch (const std::invalid_argument&) {
        }
      }
    if (merging) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& [n, med] : result.merging->medians())
        if (med > 0.0) pts.emplace_back(static_cast<double>(n), med);
      if (pts.size() >= 4) result.merging->slope = fit_slope_points(pts);
    }
  }
  return result;
}

RateTable run(const ExperimentPlan& plan) {
  auto result = run_study(plan);
  if (result.rates.invalid_fraction() > 0.1) {
    auto msg = "rate study aborted: " + std::to_string(result.rates.invalid_fraction() * 100.0) + "% invalid cells";
    throw StudyAborted(msg, std::move(result));
  }
  return std::move(result.rates);
}

MergingTable merging_study(const ExperimentPlan& plan) {
  const auto has = [&](Estimator e) {
    return std::find(plan.estimators.begin(), plan.estimators.end(), e) != plan.estimators.end();
  };
  if (!has(Estimator::npmle) || !has(Estimator::bayes))
    throw std::invalid_argument("merging_study: plan must include npmle and bayes");
  auto result = run_study(plan);
  if (result.rates.invalid_fraction() > 0.1) {
    auto msg = "merging study aborted: " + std::to_string(result.rates.invalid_fraction() * 100.0) + "% invalid cells";
    throw StudyAborted(msg, std::move(result));
  }
  return std::move(*result.merging);
}

}  // namespace lapdecon
