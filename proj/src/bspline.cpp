#include "densreg/bspline.hpp"

#include <algorithm>

#include "densreg/error.hpp"

namespace densreg {

std::vector<double> clamped_knots(double a, double b, int functions, int degree) {
  if (degree < 0) throw Error(ErrorKind::invalid_argument, "spline degree must be nonnegative");
  if (!(a < b)) throw Error(ErrorKind::invalid_argument, "spline range needs lower < upper");
  const int interior = functions - degree - 1;
  if (interior < 0)
    throw Error(ErrorKind::invalid_argument, "need at least degree + 1 spline functions");
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(functions + degree + 1));
  for (int i = 0; i <= degree; ++i) t.push_back(a);
  for (int i = 1; i <= interior; ++i) t.push_back(a + (b - a) * i / (interior + 1));
  for (int i = 0; i <= degree; ++i) t.push_back(b);
  return t;
}

Eigen::VectorXd bspline_eval(const std::vector<double>& knots, int degree, double x) {
  const int n = static_cast<int>(knots.size()) - degree - 1;
  if (n <= 0) throw Error(ErrorKind::invalid_argument, "knot vector too short for the degree");
  const double lo = knots[static_cast<std::size_t>(degree)];
  const double hi = knots[static_cast<std::size_t>(n)];
  if (!(x >= lo && x <= hi)) throw Error(ErrorKind::out_of_span, "point outside the spline span");

  // span index i with t_i <= x < t_{i+1}; the right end maps to the last nonempty interval
  int i;
  if (x >= hi) {
    i = n - 1;
    while (i > degree && knots[static_cast<std::size_t>(i)] == hi) --i;
  } else {
    auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n + 1, x);
    i = static_cast<int>(it - knots.begin()) - 1;
  }

  std::vector<double> N(static_cast<std::size_t>(degree + 1), 0.0), left(N.size()), right(N.size());
  N[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[static_cast<std::size_t>(j)] = x - knots[static_cast<std::size_t>(i + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(i + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = denom == 0.0 ? 0.0 : N[static_cast<std::size_t>(r)] / denom;
      N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    N[static_cast<std::size_t>(j)] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int r = 0; r <= degree; ++r) out(i - degree + r) = N[static_cast<std::size_t>(r)];
  return out;
}

Eigen::MatrixXd difference_penalty(int functions, int order) {
  if (order < 0 || order >= functions)
    throw Error(ErrorKind::invalid_argument, "difference order must be below the number of coefficients");
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(functions, functions);
  for (int r = 0; r < order; ++r) {
    const Eigen::Index rows = D.rows() - 1;
    D = (D.bottomRows(rows) - D.topRows(rows)).eval();
  }
  return D.transpose() * D;
}

Eigen::MatrixXd constraint_null_space(const Eigen::VectorXd& c) {
  const Eigen::Index k = c.size();
  if (k < 1) throw Error(ErrorKind::invalid_argument, "empty constraint vector");
  if (c.norm() == 0.0) throw Error(ErrorKind::degenerate_basis, "constraint vector is zero");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  return Q.rightCols(k - 1);
}

}  // namespace densreg
