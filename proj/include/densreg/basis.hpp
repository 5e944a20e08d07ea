#pragma once

#include <Eigen/Dense>
#include <vector>

#include "densreg/bayes_space.hpp"

namespace densreg {

struct ResponseBasisSpec {
  /// Number of constrained continuous functions; one more raw B-spline is used.
  int continuous_functions = 12;
  int degree = 3;
  int penalty_order = 2;
};

struct ConstrainedBasis {
  std::vector<GridFunction> functions;
  /// Raw-to-constrained map, (K+1) x K with orthonormal columns.
  Eigen::MatrixXd transform;
};

/// Linear combinations of the raw functions that integrate to zero under the domain measure.
ConstrainedBasis constrain_zero_integral(const std::vector<GridFunction>& raw);

/// Places constrained continuous functions (interval-only domain) and constrained
/// discrete functions (atoms plus one extra point standing for the interval, whose
/// weight must equal the interval length) on the mixed domain.
std::vector<GridFunction> embed_mixed(const std::vector<GridFunction>& continuous,
                                      const std::vector<GridFunction>& discrete, const DomainPtr& mixed);

/// Zero-integral basis of the response space with exact pointwise evaluation.
class ResponseBasis {
 public:
  ResponseBasis(DomainPtr domain, ResponseBasisSpec spec = {});

  const DomainPtr& domain() const { return domain_; }
  const ResponseBasisSpec& spec() const { return spec_; }
  Eigen::Index size() const { return grid_values_.cols(); }
  Eigen::Index continuous_size() const { return continuous_size_; }
  Eigen::Index discrete_size() const { return size() - continuous_size_; }
  const std::vector<double>& knots() const { return knots_; }

  /// Basis values at y: atom values when y is an atom location, else continuous values.
  Eigen::VectorXd evaluate(double y) const;
  Eigen::MatrixXd evaluate(const std::vector<double>& ys) const;

  /// Q x K_Y values at grid nodes; D x K_Y values at atoms.
  const Eigen::MatrixXd& grid_values() const { return grid_values_; }
  const Eigen::MatrixXd& atom_values() const { return atom_values_; }
  std::vector<GridFunction> functions() const;
  GridFunction combine(const Eigen::VectorXd& coefficients) const;

  /// Response penalty diag(P_c, I_D) in constrained coordinates.
  const Eigen::MatrixXd& penalty() const { return penalty_; }
  /// Gram matrix of Bayes inner products between basis functions.
  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  DomainPtr domain_;
  ResponseBasisSpec spec_;
  std::vector<double> knots_;
  Eigen::MatrixXd continuous_transform_;
  Eigen::MatrixXd discrete_transform_;
  Eigen::Index continuous_size_ = 0;
  Eigen::MatrixXd grid_values_;
  Eigen::MatrixXd atom_values_;
  Eigen::MatrixXd penalty_;
  Eigen::MatrixXd gram_;
};

/// Kronecker row b_X (x) b_Y, index n * K_Y + m.
Eigen::VectorXd tensor_row(const Eigen::VectorXd& bx, const Eigen::VectorXd& by);

/// xi_X (P_X (x) I) + xi_Y (I (x) P_Y).
Eigen::MatrixXd penalty_block(double xi_x, double xi_y, const Eigen::MatrixXd& px, const Eigen::MatrixXd& py);

}  // namespace densreg
