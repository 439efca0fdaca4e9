#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapdecon/dp_bayes.hpp"
#include "lapdecon/model.hpp"
#include "lapdecon/npmle.hpp"

namespace lapdecon {

enum class Estimator { npmle, bayes, deconv };
enum class Metric { hellinger, l1, l2, w1 };

std::string to_string(Estimator e);
std::string to_string(Metric m);
Estimator estimator_from_string(const std::string& s);
Metric metric_from_string(const std::string& s);

struct ExperimentPlan {
  GroundTruthSpec ground_truth;
  std::vector<std::size_t> n_grid{250, 500, 1000, 2000, 4000};
  std::size_t reps = 16;
  std::vector<Estimator> estimators{Estimator::npmle, Estimator::bayes};
  std::vector<Metric> metrics{Metric::hellinger, Metric::w1};
  std::uint64_t master_seed = 20240601;
  std::string output_dir = "rates_out";

  SolverConfig npmle;
  DpPrior prior;
  //! Per-n budget is max(mcmc.iterations, 10 n) iterations, with burn-in
  //! scaled in proportion.
  McmcConfig mcmc;
  double deconv_constant = 1.0;  // h = c n^{-1/5}

  void validate() const;
};

struct RateRecord {
  Estimator estimator;
  Metric metric;
  std::size_t n;
  std::size_t rep;
  double error;  // NaN when invalid
  std::uint64_t seed;
  bool valid;
};

struct SlopeFit {
  double slope;
  double stderr_slope;
  double r2;
  //! One-sided p-value for slope < 0 (Student t, k - 2 degrees of freedom).
  double p_negative;
  std::size_t points;
};

struct SlopeRow {
  Estimator estimator;
  Metric metric;
  SlopeFit fit;
};

struct RateTable {
  std::vector<RateRecord> records;
  std::vector<SlopeRow> slopes;  // empty when fewer than 4 n values

  [[nodiscard]] double invalid_fraction() const;
  //! Median valid error per n, in n-grid order.
  [[nodiscard]] std::vector<std::pair<std::size_t, double>> medians(Estimator e, Metric m) const;
};

struct MergingRow {
  std::size_t n;
  std::size_t rep;
  double w1_bayes_npmle;
  double w1_bayes_truth;
  double w1_npmle_truth;
  bool triangle_ok;
};

struct MergingTable {
  std::vector<MergingRow> rows;
  std::optional<SlopeFit> slope;
  [[nodiscard]] std::vector<std::pair<std::size_t, double>> medians() const;
};

struct StudyResult {
  RateTable rates;
  std::optional<MergingTable> merging;  // present when both npmle and bayes run
};

//! Ordinary least squares of log error on log n. Throws with < 2 points;
//! standard error and p-value need >= 3.
SlopeFit fit_slope_points(const std::vector<std::pair<double, double>>& n_and_error);
//! Slope of log(median error) on log n for one estimator/metric; needs >= 4
//! distinct n with positive medians.
SlopeFit fit_slope(const std::vector<RateRecord>& records, Estimator e, Metric m);

//! Runs every (n, rep) replicate; records are ordered by (n, rep, estimator,
//! metric) independent of scheduling.
StudyResult run_study(const ExperimentPlan& plan);
//! run_study, then throws StudyAborted when more than 10% of cells failed.
RateTable run(const ExperimentPlan& plan);
MergingTable merging_study(const ExperimentPlan& plan);

class StudyAborted : public std::runtime_error {
 public:
  StudyAborted(const std::string& what, StudyResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const StudyResult& partial() const noexcept { return partial_; }

 private:
  StudyResult partial_;
};

//! McmcConfig used for sample size n.
McmcConfig scaled_mcmc(const McmcConfig& base, std::size_t n);

}  // namespace lapdecon
