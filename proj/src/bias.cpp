#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lapdecon/metrics.hpp"

namespace lapdecon {

double ErrorLaw::beta() const {
  switch (kind) {
    case Kind::laplace: return 2.0;
    case Kind::gamma: return shape;
    case Kind::linnik: return shape;
  }
  return 0.0;
}

double ErrorLaw::decay_constant() const {
  return kind == Kind::gamma ? std::pow(rate, shape) : 1.0;
}

double ErrorLaw::ft_modulus_sq(double t) const {
  switch (kind) {
    case Kind::laplace: {
      const double d = 1.0 + t * t;
      return 1.0 / (d * d);
    }
    case Kind::gamma: return std::pow(1.0 + (t / rate) * (t / rate), -shape);
    case Kind::linnik: {
      const double d = 1.0 + std::pow(std::abs(t), shape);
      return 1.0 / (d * d);
    }
  }
  return 0.0;
}

void ErrorLaw::validate() const {
  if (kind == Kind::gamma && !(shape > 0.0 && rate > 0.0))
    throw std::invalid_argument("gamma law: shape and rate must be positive");
  if (kind == Kind::linnik && !(shape > 0.0 && shape <= 2.0))
    throw std::invalid_argument("linnik law: alpha must lie in (0, 2]");
  // f in L2 needs beta > 1/2.
  if (!(beta() > 0.5)) throw std::invalid_argument("error law: decay degree must exceed 1/2");
}

std::string to_string(SmoothingKernel k) {
  switch (k) {
    case SmoothingKernel::gaussian: return "gaussian";
    case SmoothingKernel::laplace: return "laplace";
    case SmoothingKernel::sinc: return "sinc";
    case SmoothingKernel::dirac: return "dirac";
  }
  return "unknown";
}

SmoothingKernel smoothing_kernel_from_string(const std::string& s) {
  if (s == "gaussian") return SmoothingKernel::gaussian;
  if (s == "laplace") return SmoothingKernel::laplace;
  if (s == "sinc") return SmoothingKernel::sinc;
  if (s == "dirac") return SmoothingKernel::dirac;
  throw std::invalid_argument("unknown smoothing kernel: " + s);
}

double kernel_ft(SmoothingKernel k, double t) {
  switch (k) {
    case SmoothingKernel::gaussian: return std::exp(-0.5 * t * t);
    case SmoothingKernel::laplace: return 1.0 / (1.0 + t * t);
    case SmoothingKernel::sinc: return std::abs(t) <= 1.0 ? 1.0 : 0.0;
    case SmoothingKernel::dirac: return 1.0;
  }
  return 0.0;
}

double kernel_order(SmoothingKernel k) {
  switch (k) {
    case SmoothingKernel::gaussian:
    case SmoothingKernel::laplace: return 2.0;
    case SmoothingKernel::sinc:
    case SmoothingKernel::dirac: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

namespace {

// 1 - K^(t), written to avoid cancellation near t = 0.
double one_minus_kernel_ft(SmoothingKernel k, double t) {
  switch (k) {
    case SmoothingKernel::gaussian: return -std::expm1(-0.5 * t * t);
    case SmoothingKernel::laplace: return t * t / (1.0 + t * t);
    case SmoothingKernel::sinc: return std::abs(t) <= 1.0 ? 0.0 : 1.0;
    case SmoothingKernel::dirac: return 0.0;
  }
  return 0.0;
}

void check_order(const ErrorLaw& f, SmoothingKernel k) {
  f.validate();
  if (kernel_order(k) < f.beta())
    throw std::invalid_argument("kernel order " + std::to_string(kernel_order(k)) +
                                " is below the decay degree of the error law");
}

// 2 * int_0^inf g(z) dz, split at the kink/scale points.
template <typename F>
double symmetric_integral(F&& g, double scale) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double tol = 1e-13;
  double s = 0.0;
  if (scale > 0.0 && scale < 1.0) {
    s += GK::integrate(g, 0.0, scale, 15, tol);
    s += GK::integrate(g, scale, 1.0, 15, tol);
  } else {
    s += GK::integrate(g, 0.0, 1.0, 15, tol);
  }
  s += GK::integrate(g, 1.0, std::numeric_limits<double>::infinity(), 15, tol);
  return 2.0 * s;
}

}  // namespace

double bias_limit(const ErrorLaw& f, SmoothingKernel k) {
  check_order(f, k);
  const double beta = f.beta();
  const double b = f.decay_constant();
  const double i2 = symmetric_integral(
      [&](double z) {
        if (z == 0.0) return 0.0;
        const double d = one_minus_kernel_ft(k, z);
        return d * d / std::pow(z, 2.0 * beta);
      },
      0.0);
  return b * b * i2 / (2.0 * std::numbers::pi);
}

std::vector<std::pair<double, double>> bias_rate_check(const ErrorLaw& f, SmoothingKernel k,
                                                       const std::vector<double>& h_grid) {
  check_order(f, k);
  const double beta = f.beta();
  std::vector<std::pair<double, double>> out;
  out.reserve(h_grid.size());
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    const double h = h_grid[i];
    if (!(h > 0.0)) throw std::invalid_argument("bias_rate_check: bandwidths must be positive");
    if (i > 0 && !(h < h_grid[i - 1])) throw std::invalid_argument("bias_rate_check: bandwidths must decrease");
    // With z = h t: h^{-2(beta-1/2)} ||f - f*K_h||^2
    //   = (2 pi)^{-1} int h^{-2 beta} |f^(z/h)|^2 |1 - K^(z)|^2 dz.
    const double scale = std::pow(h, -2.0 * beta);
    const double integral = symmetric_integral(
        [&](double z) {
          const double d = one_minus_kernel_ft(k, z);
          return d == 0.0 ? 0.0 : scale * f.ft_modulus_sq(z / h) * d * d;
        },
        h);
    out.emplace_back(h, integral / (2.0 * std::numbers::pi));
  }
  return out;
}

}  // namespace lapdecon
