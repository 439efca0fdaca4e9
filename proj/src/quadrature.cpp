#include "lapdecon/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace lapdecon {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;

void add_panel(CompositeRule& rule, double a, double b) {
  const auto& xs = Gauss::abscissa();  // nonnegative half, xs[0] == 0 for odd orders only
  const auto& ws = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  // 10 points: abscissae are stored as 5 positive values.
  for (std::size_t i = xs.size(); i-- > 0;) {
    rule.nodes.push_back(mid - half * xs[i]);
    rule.weights.push_back(half * ws[i]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rule.nodes.push_back(mid + half * xs[i]);
    rule.weights.push_back(half * ws[i]);
  }
}

}  // namespace

CompositeRule composite_gauss(std::span<const double> breakpoints, double lo, double hi, double max_panel) {
  if (!(hi > lo) || !(max_panel > 0.0)) throw std::invalid_argument("composite_gauss: bad interval");
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  CompositeRule rule;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double pa = a + width * static_cast<double>(k);
      const double pb = k + 1 == panels ? b : pa + width;
      add_panel(rule, pa, pb);
    }
  }
  return rule;
}

}  // namespace lapdecon
