#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lapdecon/deconv.hpp"
#include "lapdecon/metrics.hpp"

using namespace lapdecon;

namespace {

double gauss(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

// Riemann-sum Fourier transform of grid values at frequency t.
std::complex<double> dft(const DensityGrid& g, double t) {
  std::complex<double> acc = 0.0;
  const auto v = g.values();
  for (std::size_t k = 0; k < v.size(); ++k) acc += v[k] * std::polar(1.0, -t * g.grid().at(k));
  return acc * g.grid().step;
}

double moment(const DensityGrid& g, int k, double c = 0.0) {
  double s = 0.0;
  const auto v = g.values();
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * std::pow(g.grid().at(i) - c, k);
  return s * g.grid().step;
}

double total_variation(const DensityGrid& g) {
  double tv = 0.0;
  const auto v = g.values();
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

std::vector<double> laplace_data(std::size_t n, std::uint64_t seed) {
  return sample(DiscreteDistribution({-1.0, 1.5}, {0.5, 0.5}), n, seed).x;
}

}  // namespace

TEST(Deconv, FourierIdentityAgainstOrdinaryKde) {
  std::mt19937_64 gen(61);
  std::uniform_int_distribution<std::size_t> size(1, 100);
  for (double h : {0.3, 0.5, 1.0}) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto x = laplace_data(size(gen), 100 + rep);
      const DeconvConfig cfg{h, std::nullopt};
      const auto g = deconv_density(x, cfg);
      const auto k = kernel_density(x, cfg);
      ASSERT_TRUE(g.grid().same_as(k.grid()));
      for (double t = -10.0; t <= 10.0; t += 0.5) {
        const auto lhs = dft(g, t) / (1.0 + t * t);
        const auto rhs = dft(k, t);
        EXPECT_LE(std::abs(lhs - rhs), 1e-6 * std::abs(rhs) + 1e-12) << "h=" << h << " t=" << t;
      }
    }
  }
}

TEST(Deconv, SingleObservationClosedForm) {
  const std::vector<double> x{0.0};
  const DeconvConfig cfg{1.0, GridSpec{-20.0, 20.0, 1e-3}};
  const auto g = deconv_density(x, cfg);
  // K - K'' = K (2 - y^2) at h = 1.
  for (std::size_t k = 0; k < g.grid().size(); k += 997) {
    const double y = g.grid().at(k);
    EXPECT_NEAR(g.values()[k], gauss(y) * (2.0 - y * y), 1e-14);
  }
  const auto v = g.values();
  for (std::size_t k = 0; k < v.size(); ++k) ASSERT_NEAR(v[k], v[v.size() - 1 - k], 1e-14);
  EXPECT_LT(g.min_value(), 0.0);
  EXPECT_NEAR(g.integral(), 1.0, 1e-6);
}

TEST(Deconv, RawMassAndVariance) {
  // The raw estimator's transform is e^{-h^2 t^2/2}(1 + t^2) times the
  // empirical characteristic function, so its variance is s^2 + h^2 - 2.
  for (double h : {0.3, 0.7, 2.0}) {
    const auto x = laplace_data(80, 7);
    const auto g = deconv_density(x, {h, std::nullopt});
    double mean = 0.0, s2 = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) s2 += (v - mean) * (v - mean);
    s2 /= static_cast<double>(x.size());
    EXPECT_NEAR(g.integral(), 1.0, 1e-6);
    EXPECT_NEAR(moment(g, 1), mean, 1e-6);
    EXPECT_NEAR(moment(g, 2, mean), s2 + h * h - 2.0, 1e-5);
  }
}

TEST(DeconvCdf, SymmetricDataCentersAtZero) {
  const std::vector<double> x{-2.0, -0.7, -0.1, 0.1, 0.7, 2.0};
  const DeconvConfig cfg{0.5, GridSpec{-15.0, 15.0, 1e-3}};
  const auto cdf = deconv_cdf(x, cfg);
  EXPECT_NEAR(cdf(0.0), 0.5, 2e-3);
}

TEST(DeconvCdf, MonotoneWithExactLimits) {
  for (double h : {0.2, 0.5, 1.0}) {
    const auto x = laplace_data(60, 3);
    const auto cdf = deconv_cdf(x, {h, std::nullopt});
    const auto v = cdf.values();
    for (std::size_t k = 1; k < v.size(); ++k) ASSERT_GE(v[k], v[k - 1]);
    EXPECT_GE(v.front(), 0.0);
    EXPECT_LT(v.front(), 1e-12);
    EXPECT_EQ(v.back(), 1.0);
    EXPECT_EQ(cdf(cdf.knots().front() - 1.0), 0.0);
  }
}

TEST(DeconvCdf, SpreadGrowsWithBandwidth) {
  const auto x = laplace_data(50, 5);
  double prev = 0.0;
  for (double h : {1.0, 2.0, 4.0, 8.0}) {
    const auto g = nonnegativize(deconv_density(x, {h, std::nullopt}));
    const double var = moment(g, 2, moment(g, 1));
    EXPECT_GT(var, prev) << h;
    prev = var;
  }
}

TEST(Deconv, TotalVariationFallsAsBandwidthDoubles) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = laplace_data(100, 200 + seed);
    double prev = std::numeric_limits<double>::infinity();
    for (double h : {0.25, 0.5, 1.0, 2.0}) {
      const DeconvConfig cfg{h, GridSpec{-30.0, 30.0, 1e-3}};
      const double tv = total_variation(deconv_density(x, cfg));
      EXPECT_LT(tv, prev) << "seed=" << seed << " h=" << h;
      prev = tv;
    }
  }
}

TEST(DeconvCdf, BeatsEmpiricalCdfForPointMass) {
  const auto g0 = DiscreteDistribution::point_mass(0.0);
  const auto truth = StepCdf::from_discrete(g0);
  const std::size_t n = 2000;
  int wins = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto x = sample(g0, n, 1000 + rep).x;
    const auto deconv = deconv_cdf(x, {default_bandwidth(n), std::nullopt});
    const auto empirical = StepCdf::from_discrete(
        DiscreteDistribution::from_unnormalized(x, std::vector<double>(x.size(), 1.0)));
    if (w1_distance(deconv, truth) < w1_distance(empirical, truth)) ++wins;
  }
  EXPECT_GT(wins, 25);
}

TEST(Deconv, RejectsBadInput) {
  const std::vector<double> x{0.0, 1.0};
  EXPECT_THROW(deconv_density(x, {0.0, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(deconv_cdf(x, {-1.0, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(deconv_density(std::vector<double>{}, {1.0, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(default_bandwidth(0), std::invalid_argument);
  EXPECT_NEAR(default_bandwidth(32), 0.5, 1e-15);
}
