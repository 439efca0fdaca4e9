#pragma once

#include <span>
#include <vector>

namespace lapdecon {

//! Composite Gauss-Legendre rule on [lo, hi] whose panels never straddle a
//! breakpoint and are at most `max_panel` long. Nodes come out sorted.
struct CompositeRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

CompositeRule composite_gauss(std::span<const double> breakpoints, double lo, double hi,
                              double max_panel = 0.5);

}  // namespace lapdecon
