#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "densreg/fit.hpp"
#include "densreg/model.hpp"

namespace densreg {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi2_cdf(double x, double dof);
/// Inverse of chi2_cdf, bracketed root finding to 1e-10 absolute.
double chi2_quantile(double p, double dof);

/// One term of a (possibly signed) sum of partial effects, evaluated at a single covariate row.
struct SignedTerm {
  std::size_t term = 0;
  CovariateTable x;
  double sign = 1.0;
};
using EffectQuery = std::vector<SignedTerm>;

/// Query for the sum of the given terms at row `row` of x.
EffectQuery sum_of_terms(const std::vector<std::size_t>& terms, const CovariateTable& x, std::size_t row = 0);

/// K_Y x K map from theta to the effect's response coefficients.
Eigen::MatrixXd effect_matrix(const Model& model, const EffectQuery& query);
/// K_j x K selector of the coefficients of term j.
Eigen::MatrixXd selection_matrix(const Model& model, std::size_t term);

/// Ellipsoid {p : (p - c)^T V^{-1} (p - c) <= radius}.
struct EffectRegion {
  Eigen::VectorXd center;
  Eigen::MatrixXd covariance;
  double level = 0.95;
  double radius = 0.0;
  /// True when small eigenvalues of the covariance were raised to the floor.
  bool floored = false;
  Eigen::MatrixXd precision;
  Eigen::MatrixXd root;

  Eigen::Index dimension() const { return center.size(); }
  double statistic(const Eigen::VectorXd& point) const;
  bool contains(const Eigen::VectorXd& point) const { return statistic(point) <= radius; }
};

EffectRegion make_region(Eigen::VectorXd center, Eigen::MatrixXd covariance, double level);
EffectRegion effect_region(const Model& model, const FitResult& fit, const EffectQuery& query, double level);
EffectRegion simultaneous_region(const Model& model, const FitResult& fit, std::size_t term, double level);

/// p-value of the hypothesis that the effect is zero.
double p_value(const EffectRegion& region);
double p_value(double statistic, Eigen::Index dimension);

/// Uniform draws from the solid ellipsoid.
std::vector<Eigen::VectorXd> sample_region(const EffectRegion& region, std::size_t count, std::uint64_t seed);

}  // namespace densreg
