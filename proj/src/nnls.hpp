#pragma once

#include <Eigen/Dense>

namespace lapdecon::detail {

//! Active-set solution of min 0.5 w'Hw - g'w over w >= 0, H symmetric positive
//! semidefinite (Lawson-Hanson pivoting on the dual g - Hw).
Eigen::VectorXd nonneg_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g);

//! Non-negative least squares: argmin ||S w - b|| over w >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& s, const Eigen::VectorXd& b);

}  // namespace lapdecon::detail
