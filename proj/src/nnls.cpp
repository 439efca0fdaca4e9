#include "nnls.hpp"

#include <algorithm>
#include <vector>

namespace lapdecon::detail {

Eigen::VectorXd nonneg_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  const Eigen::Index k = h.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-13 * std::max(1.0, g.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd hp(m, m);
    Eigen::VectorXd gp(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      gp(a) = g(idx[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < m; ++b) hp(a, b) = h(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    const Eigen::VectorXd zp = hp.completeOrthogonalDecomposition().solve(gp);
    z.setZero(k);
    for (Eigen::Index a = 0; a < m; ++a) z(idx[static_cast<std::size_t>(a)]) = zp(a);
  };

  for (Eigen::Index outer = 0; outer < 3 * k + 10; ++outer) {
    const Eigen::VectorXd dual = g - h * w;
    Eigen::Index best = -1;
    double top = tol;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!passive[static_cast<std::size_t>(j)] && dual(j) > top) {
        top = dual(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z;
    for (Eigen::Index inner = 0; inner <= k; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < k; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          feasible = false;
          alpha = std::min(alpha, w(j) / (w(j) - z(j)));
        }
      if (feasible) break;
      w += alpha * (z - w);
      for (Eigen::Index j = 0; j < k; ++j)
        if (passive[static_cast<std::size_t>(j)] && w(j) <= 1e-15 * w.maxCoeff()) {
          passive[static_cast<std::size_t>(j)] = false;
          w(j) = 0.0;
        }
    }
    bool any = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)]) z(j) = 0.0;
      any = any || passive[static_cast<std::size_t>(j)];
    }
    if (!any) break;
    w = z.cwiseMax(0.0);
  }
  return w;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& s, const Eigen::VectorXd& b) {
  return nonneg_qp(s.transpose() * s, s.transpose() * b);
}

}  // namespace lapdecon::detail
