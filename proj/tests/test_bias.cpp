#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lapdecon/metrics.hpp"
#include "support/oracles.hpp"

using namespace lapdecon;

// Reference values computed offline with mpmath (50 digits) from
// (2 pi)^{-1} int h^{-2 beta} |f^(z/h)|^2 |1 - K^(z)|^2 dz and its h -> 0 limit.
namespace frozen {
constexpr double laplace_gauss_limit = 0.110164868764216;
constexpr double laplace_gauss_i2 = 0.692186284786688;
constexpr double laplace_gauss_h[3][2] = {
    {0.05, 0.101257272870434}, {0.025, 0.105596541026854}, {0.0125, 0.107851209364527}};
constexpr double gamma11_gauss_limit = 0.233694977255109;
constexpr double gamma11_gauss_i1 = 1.468348847450969;
constexpr double gamma11_gauss_h[3][2] = {
    {0.05, 0.233434601211364}, {0.025, 0.233628039947449}, {0.0125, 0.233678005779460}};
}  // namespace frozen

TEST(BiasLimit, LaplaceGaussian) {
  const double lim = bias_limit(ErrorLaw::laplace(), SmoothingKernel::gaussian);
  EXPECT_NEAR(lim, frozen::laplace_gauss_limit, 1e-11);
  EXPECT_NEAR(lim * 2.0 * std::numbers::pi, frozen::laplace_gauss_i2, 1e-10);
  // Independent check of I^2_2 by Simpson on |1 - e^{-t^2/2}|^2 / t^4.
  const double simpson = 2.0 * oracle::simpson(
                                   [](double t) {
                                     if (t == 0.0) return 0.25;
                                     const double d = -std::expm1(-0.5 * t * t);
                                     return d * d / (t * t * t * t);
                                   },
                                   0.0, 200.0, 2000000);
  // Tail beyond 200: int t^{-4} = 1/(3 * 200^3) per side.
  EXPECT_NEAR(simpson + 2.0 / (3.0 * 200.0 * 200.0 * 200.0), frozen::laplace_gauss_i2, 1e-9);
}

TEST(BiasRate, LaplaceGaussianMatchesFrozenValues) {
  std::vector<double> hs;
  for (const auto& row : frozen::laplace_gauss_h) hs.push_back(row[0]);
  const auto rows = bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::gaussian, hs);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].first, hs[i]);
    EXPECT_NEAR(rows[i].second, frozen::laplace_gauss_h[i][1], 1e-10);
  }
}

TEST(BiasRate, LaplaceGaussianDirectNormAgrees) {
  // ||f - f * K_h||_2^2 by Plancherel with |f^|^2 = (1 + t^2)^{-2}, as a
  // plain Simpson integral in t.
  const double h = 0.05;
  const double norm = 2.0 * oracle::simpson(
                                [h](double t) {
                                  const double d = -std::expm1(-0.5 * h * h * t * t);
                                  return d * d / ((1.0 + t * t) * (1.0 + t * t));
                                },
                                0.0, 4000.0, 4000000) /
                      (2.0 * std::numbers::pi);
  const auto rows = bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::gaussian, {h});
  EXPECT_NEAR(rows[0].second, norm / std::pow(h, 3.0), 1e-7);
}

TEST(BiasRate, SequenceStabilizesOnFineGrid) {
  const std::vector<double> hs{0.05, 0.025, 0.0125, 0.00625, 0.003125};
  const auto rows = bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::gaussian, hs);
  const double lim = bias_limit(ErrorLaw::laplace(), SmoothingKernel::gaussian);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].second, rows[i - 1].second);
  const double a = rows[3].second, b = rows[4].second;
  EXPECT_LT(std::abs(a - b) / b, 0.02);
  EXPECT_LT(std::abs(b - lim) / lim, 0.05);
}

TEST(BiasRate, GammaExponentialLaw) {
  const auto law = ErrorLaw::gamma(1.0, 1.0);
  EXPECT_EQ(law.beta(), 1.0);
  const double lim = bias_limit(law, SmoothingKernel::gaussian);
  EXPECT_NEAR(lim, frozen::gamma11_gauss_limit, 1e-11);
  EXPECT_NEAR(lim * 2.0 * std::numbers::pi, frozen::gamma11_gauss_i1, 1e-10);
  std::vector<double> hs;
  for (const auto& row : frozen::gamma11_gauss_h) hs.push_back(row[0]);
  const auto rows = bias_rate_check(law, SmoothingKernel::gaussian, hs);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(rows[i].second, frozen::gamma11_gauss_h[i][1], 1e-10);
  // Three significant digits at the smallest h.
  EXPECT_LT(std::abs(rows[2].second - lim) / lim, 5e-4);
}

TEST(BiasRate, DegenerateKernelHasNoBias) {
  for (const auto& law : {ErrorLaw::laplace(), ErrorLaw::gamma(2.5, 0.7), ErrorLaw::linnik(1.5)}) {
    const auto rows = bias_rate_check(law, SmoothingKernel::dirac, {0.5, 0.1, 0.01});
    for (const auto& [h, v] : rows) EXPECT_EQ(v, 0.0) << h;
    EXPECT_EQ(bias_limit(law, SmoothingKernel::dirac), 0.0);
  }
}

TEST(BiasRate, SincKernelApproachesClosedLimit) {
  // Laplace f with the sinc kernel: limit (2 pi)^{-1} 2 int_1^inf z^{-4} dz = 1 / (3 pi).
  const double lim = bias_limit(ErrorLaw::laplace(), SmoothingKernel::sinc);
  EXPECT_NEAR(lim, 1.0 / (3.0 * std::numbers::pi), 1e-10);
  const auto rows = bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::sinc, {0.1, 0.01, 0.001});
  EXPECT_NEAR(rows[2].second, lim, 1e-2 * lim);
}

TEST(BiasRate, LinnikLaw) {
  const auto law = ErrorLaw::linnik(1.5);
  EXPECT_EQ(law.beta(), 1.5);
  const auto rows = bias_rate_check(law, SmoothingKernel::gaussian, {0.02, 0.01, 0.005, 0.0025});
  const double lim = bias_limit(law, SmoothingKernel::gaussian);
  EXPECT_LT(std::abs(rows[3].second - lim) / lim, std::abs(rows[0].second - lim) / lim);
}

TEST(BiasRate, RejectsBadInput) {
  // A second-order kernel cannot resolve decay degree 3.
  EXPECT_THROW(bias_rate_check(ErrorLaw::gamma(3.0, 1.0), SmoothingKernel::gaussian, {0.1}), std::invalid_argument);
  EXPECT_THROW(bias_limit(ErrorLaw::gamma(3.0, 1.0), SmoothingKernel::laplace), std::invalid_argument);
  EXPECT_NO_THROW(bias_rate_check(ErrorLaw::gamma(3.0, 1.0), SmoothingKernel::sinc, {0.1}));
  EXPECT_THROW(bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::gaussian, {0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(bias_rate_check(ErrorLaw::laplace(), SmoothingKernel::gaussian, {0.0}), std::invalid_argument);
  EXPECT_THROW(ErrorLaw::linnik(2.5).validate(), std::invalid_argument);
  EXPECT_THROW(ErrorLaw::gamma(0.4, 1.0).validate(), std::invalid_argument);
  EXPECT_EQ(smoothing_kernel_from_string("sinc"), SmoothingKernel::sinc);
  EXPECT_THROW(smoothing_kernel_from_string("epanechnikov"), std::invalid_argument);
}

TEST(KernelFt, NormalizedAtZero) {
  for (auto k : {SmoothingKernel::gaussian, SmoothingKernel::laplace, SmoothingKernel::sinc, SmoothingKernel::dirac})
    EXPECT_EQ(kernel_ft(k, 0.0), 1.0);
  EXPECT_NEAR(ErrorLaw::laplace().ft_modulus_sq(1.0), 0.25, 1e-15);
  EXPECT_NEAR(ErrorLaw::gamma(2.0, 3.0).decay_constant(), 9.0, 1e-15);
}
