#pragma once

#include <Eigen/Dense>
#include <vector>

namespace densreg {

/// Knot vector with equally spaced interior knots and degree-fold repeated
/// boundary knots, giving `functions` B-splines on [a, b].
std::vector<double> clamped_knots(double a, double b, int functions, int degree);

/// All B-splines of the given degree at x (Cox-de Boor). The right end of the
/// span is included in the last interval.
Eigen::VectorXd bspline_eval(const std::vector<double>& knots, int degree, double x);

/// D^T D for the order-r difference matrix on `functions` coefficients.
Eigen::MatrixXd difference_penalty(int functions, int order);

/// Orthonormal Z with c^T Z = 0, from the Householder QR of c.
Eigen::MatrixXd constraint_null_space(const Eigen::VectorXd& c);

}  // namespace densreg
