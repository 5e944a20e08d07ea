#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "densreg/binning.hpp"
#include "densreg/model.hpp"

namespace densreg {

/// Symmetric matrix [A C; C^T diag(d)] whose trailing block is diagonal.
struct BlockSymmetric {
  Eigen::MatrixXd leading;
  Eigen::MatrixXd coupling;
  Eigen::VectorXd tail;

  Eigen::Index size() const { return leading.rows() + tail.size(); }
  Eigen::MatrixXd dense() const;
};

/// Solves F x = rhs for positive definite F; throws SingularHessian otherwise.
Eigen::VectorXd solve_positive(const BlockSymmetric& F, const Eigen::VectorXd& rhs);
/// Top-left k x k block of F^{-1}.
Eigen::MatrixXd inverse_leading(const BlockSymmetric& F, Eigen::Index k);

struct Evaluation {
  /// Penalized log-likelihood.
  double value = 0.0;
  /// Unpenalized log-likelihood.
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  /// Negative Hessian of the penalized log-likelihood.
  BlockSymmetric fisher;
};

/// Penalized log-likelihood in (theta, nuisance) with pen(theta) = -theta^T P theta.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Eigen::Index dimension() const = 0;
  Eigen::Index theta_dimension() const { return penalty_.rows(); }
  virtual Evaluation evaluate(const Eigen::VectorXd& params, bool derivatives = true) const = 0;
  virtual Eigen::VectorXd initial_point() const { return Eigen::VectorXd::Zero(dimension()); }
  const Eigen::MatrixXd& penalty() const { return penalty_; }

 protected:
  explicit Objective(Eigen::MatrixXd penalty);
  void add_penalty(const Eigen::VectorXd& params, Evaluation& ev, bool derivatives) const;

  Eigen::MatrixXd penalty_;
  /// R with R^T R = P.
  Eigen::MatrixXd penalty_root_;
};

/// Response-basis rows for the cells of one combo: shared rows with per-combo replacements.
struct CellRows {
  std::shared_ptr<const Eigen::MatrixXd> shared;
  std::vector<Eigen::Index> replaced;
  Eigen::MatrixXd replacement;

  Eigen::Index rows() const { return shared->rows(); }
  Eigen::VectorXd times(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd transpose_times(const Eigen::VectorXd& w) const;
  Eigen::MatrixXd weighted_gram(const Eigen::VectorXd& w) const;
};

/// Covariate row b_X of a combo with its nonzero positions.
struct ComboRow {
  Eigen::VectorXd values;
  std::vector<Eigen::Index> nonzero;
  static ComboRow from(const Eigen::VectorXd& row);
};

/// Direct log-likelihood with integrals evaluated by quadrature.
class BayesObjective : public Objective {
 public:
  BayesObjective(const Model& model, const CovariateTable& covariates, std::span<const double> ys,
                 std::span<const double> weights, Eigen::MatrixXd penalty);
  Eigen::Index dimension() const override { return theta_dimension(); }
  Evaluation evaluate(const Eigen::VectorXd& params, bool derivatives = true) const override;

 private:
  Eigen::Index kx_ = 0, ky_ = 0;
  std::vector<ComboRow> rows_;
  std::vector<Eigen::VectorXd> stats_;
  std::vector<double> totals_;
  CellRows nodes_;
  Eigen::VectorXd node_weights_;
};

/// Binned multinomial log-likelihood.
class MultinomialObjective : public Objective {
 public:
  MultinomialObjective(const Model& model, const BinnedDesign& design, Eigen::MatrixXd penalty);
  Eigen::Index dimension() const override { return theta_dimension(); }
  Evaluation evaluate(const Eigen::VectorXd& params, bool derivatives = true) const override;

 private:
  Eigen::Index kx_ = 0, ky_ = 0;
  std::vector<ComboRow> rows_;
  std::vector<CellRows> cells_;
  std::vector<Eigen::VectorXd> widths_;
  std::vector<Eigen::VectorXd> stats_;
  std::vector<double> totals_;
};

enum class InterceptMode { per_combo, smooth };

/// Weighted Poisson log-likelihood with log-width and -log(weight) offsets and
/// one intercept per combo (or a covariate-smooth intercept).
class PoissonObjective : public Objective {
 public:
  PoissonObjective(const Model& model, const BinnedDesign& design, Eigen::MatrixXd penalty,
                   InterceptMode mode = InterceptMode::per_combo);
  Eigen::Index dimension() const override { return theta_dimension() + nuisance_; }
  Evaluation evaluate(const Eigen::VectorXd& params, bool derivatives = true) const override;
  Eigen::VectorXd initial_point() const override;
  InterceptMode mode() const { return mode_; }

 private:
  InterceptMode mode_;
  Eigen::Index kx_ = 0, ky_ = 0, nuisance_ = 0;
  double total_mass_ = 1.0;
  std::vector<ComboRow> rows_;
  std::vector<CellRows> cells_;
  std::vector<Eigen::VectorXd> counts_, weights_, offsets_;
};

/// Basis rows at each combo's cell representatives, sharing rows across combos.
std::vector<CellRows> cell_rows(const ResponseBasis& basis, const BinnedDesign& design);

}  // namespace densreg
