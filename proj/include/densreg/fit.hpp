#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "densreg/binning.hpp"
#include "densreg/model.hpp"
#include "densreg/objective.hpp"

namespace densreg {

struct NewtonOptions {
  int max_iterations = 200;
  int max_halvings = 30;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-10;
};

struct NewtonResult {
  Eigen::VectorXd params;
  Evaluation evaluation;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  /// Penalized objective after each accepted iterate, starting with the initial point.
  std::vector<double> trace;
};

/// Damped Newton ascent with step halving.
NewtonResult fit_newton(const Objective& objective, const Eigen::VectorXd& start, const NewtonOptions& options = {});

enum class ObjectiveKind { bayes, multinomial, poisson };

const char* to_string(ObjectiveKind kind);
const char* to_string(InterceptMode mode);

struct FitOptions {
  ObjectiveKind objective = ObjectiveKind::poisson;
  InterceptMode intercepts = InterceptMode::per_combo;
  NewtonOptions newton;
};

struct FitResult {
  ObjectiveKind objective = ObjectiveKind::poisson;
  InterceptMode intercepts = InterceptMode::per_combo;
  Eigen::VectorXd theta;
  /// Poisson intercepts (per combo or covariate coefficients); empty otherwise.
  Eigen::VectorXd tau;
  Smoothing smoothing;
  /// Penalized Fisher information in (theta, tau).
  BlockSymmetric fisher;
  /// Theta block of the inverse penalized Fisher information.
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  /// trace(F_unpen F_pen^{-1}).
  double edf = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> trace;
};

/// Runs Newton from the objective's initial point and derives the covariance block and edf.
FitResult fit_objective(const Objective& objective, const NewtonOptions& options = {});

FitResult fit_binned(const Model& model, const BinnedDesign& design, const Smoothing& smoothing,
                     const FitOptions& options = {});

FitResult fit_direct_bayes(const Model& model, const CovariateTable& covariates, std::span<const double> ys,
                           std::span<const double> weights, const Smoothing& smoothing,
                           const NewtonOptions& options = {});

struct SmoothingCandidate {
  Smoothing smoothing;
  double criterion = 0.0;
  double edf = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::string failure;
};

struct SmoothingSelection {
  std::vector<SmoothingCandidate> candidates;
  std::size_t chosen = 0;
  FitResult fit;
};

/// Grid search over the model's automatic smoothing directions minimizing -2 loglik + 2 edf;
/// ties go to the largest smoothing parameters.
SmoothingSelection select_smoothing(const Model& model, const BinnedDesign& design, const std::vector<double>& grid,
                                    const FitOptions& options = {});

/// Observations in memory: covariates, responses and optional sample weights.
struct Observations {
  CovariateTable covariates;
  std::vector<double> response;
  std::vector<double> weights;
};

struct FittedModel {
  Model model;
  BinnedDesign design;
  FitResult fit;
  RankReport ranks;
  std::vector<SmoothingCandidate> candidates;
};

/// Compiles the model on the data, bins with G equidistant bins and fits (with grid search
/// when the grid is nonempty and some direction is automatic).
FittedModel fit_model(const ModelSpec& spec, const Observations& data, int bins, const FitOptions& options = {},
                      const std::vector<double>& grid = {});

BinnedDesign bin_for_model(const Model& model, const Observations& data, int bins);
RankReport check_model_ranks(const Model& model, const BinnedDesign& design);

}  // namespace densreg
