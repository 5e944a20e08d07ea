#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "densreg/basis.hpp"
#include "densreg/covariates.hpp"

namespace densreg {

enum class TermKind { intercept, categorical, linear, smooth, varying };

const char* to_string(TermKind kind);

struct SmoothingValue {
  double value = 0.0;
  /// Selected by grid search instead of fixed.
  bool automatic = false;
};

struct SplineSpec {
  int functions = 8;
  int degree = 3;
  int penalty_order = 2;
  std::optional<Interval> range;
};

/// One additive term of the covariate predictor.
struct TermSpec {
  TermKind kind = TermKind::intercept;
  std::string label;
  /// Numeric covariate of linear, smooth and varying terms.
  std::string covariate;
  /// Base shape of a varying term (linear or smooth).
  TermKind base = TermKind::smooth;
  /// Categorical covariates: the factors of a categorical term or the grouping of a varying term.
  std::vector<std::string> factors;
  std::map<std::string, std::string> reference;
  std::map<std::string, std::vector<std::string>> levels;
  SplineSpec spline;
  bool center = true;
  SmoothingValue xi_x;
  SmoothingValue xi_y;
};

struct FactorLevels {
  std::string name;
  std::vector<std::string> levels;
  std::size_t reference = 0;
};

/// Data-dependent parts of a compiled term.
struct TermState {
  std::vector<FactorLevels> factors;
  std::vector<double> knots;
  Interval range;
  /// Linear centering, one mean per group.
  std::vector<double> means;
  /// Smooth centering, one raw-to-constrained map per group.
  std::vector<Eigen::MatrixXd> transforms;
};

/// Compiled covariate basis b_Xj of one term.
class CovariateBasis {
 public:
  CovariateBasis(TermSpec spec, TermState state);
  static CovariateBasis compile(const TermSpec& spec, const CovariateTable& observed);

  const TermSpec& spec() const { return spec_; }
  const TermState& state() const { return state_; }
  const std::string& label() const { return label_; }
  Eigen::Index size() const { return size_; }
  Eigen::MatrixXd evaluate(const CovariateTable& x) const;
  /// P_Xj; zero for unpenalized term types.
  const Eigen::MatrixXd& penalty() const { return penalty_; }
  bool has_x_penalty() const { return spec_.kind == TermKind::smooth || (spec_.kind == TermKind::varying && spec_.base == TermKind::smooth); }
  /// Number of grouping cells (non-reference level combinations); 1 when ungrouped.
  std::size_t group_count() const;
  /// Group of a row, or -1 when some factor is at its reference level.
  long group_of(const CovariateTable& x, std::size_t row) const;
  std::string group_name(std::size_t group) const;

 private:
  Eigen::VectorXd base_values(std::size_t group, double x) const;
  Eigen::Index base_size() const;
  void finalize();

  TermSpec spec_;
  TermState state_;
  std::string label_;
  Eigen::Index size_ = 0;
  Eigen::MatrixXd penalty_;
};

struct ModelSpec {
  std::string response = "y";
  std::optional<Interval> interval = Interval{0.0, 1.0};
  std::vector<Atom> atoms;
  int quadrature_nodes = 1001;
  ResponseBasisSpec basis;
  std::vector<TermSpec> terms;
  /// Optional sample-weight column.
  std::string weights;
};

struct TermSmoothing {
  double xi_x = 0.0;
  double xi_y = 0.0;
};
using Smoothing = std::vector<TermSmoothing>;

/// Smoothing direction chosen by grid search: term index and whether it is the covariate direction.
struct SmoothingDirection {
  std::size_t term = 0;
  bool covariate_direction = true;
};

class Model {
 public:
  Model(ModelSpec spec, std::vector<CovariateBasis> terms);
  static Model compile(const ModelSpec& spec, const CovariateTable& observed);

  const ModelSpec& spec() const { return spec_; }
  const DomainPtr& domain() const { return response_->domain(); }
  const ResponseBasis& response() const { return *response_; }
  const std::vector<CovariateBasis>& terms() const { return terms_; }
  std::size_t term_index(const std::string& label) const;

  Eigen::Index covariate_size() const { return offsets_.back(); }
  Eigen::Index response_size() const { return response_->size(); }
  Eigen::Index coefficient_size() const { return covariate_size() * response_size(); }
  /// Offset of term j inside b_X.
  Eigen::Index term_offset(std::size_t j) const { return offsets_[j]; }

  Eigen::MatrixXd design(const CovariateTable& x) const;
  Eigen::MatrixXd penalty(const Smoothing& smoothing) const;
  Smoothing default_smoothing() const;
  std::vector<SmoothingDirection> automatic_directions() const;

  /// Covariate columns the terms read, split by type.
  std::vector<std::string> numeric_covariates() const;
  std::vector<std::string> categorical_covariates() const;

 private:
  ModelSpec spec_;
  std::shared_ptr<const ResponseBasis> response_;
  std::vector<CovariateBasis> terms_;
  std::vector<Eigen::Index> offsets_;
};

/// Outcome of the identifiability rank checks.
struct RankReport {
  Eigen::Index covariate_rank = 0;
  Eigen::Index covariate_size = 0;
  Eigen::Index response_size = 0;
  /// Rank of [B_Y^(l), 1] for every combo.
  std::vector<Eigen::Index> combo_ranks;
  std::vector<std::size_t> deficient_combos;
  bool covariate_ok() const { return covariate_rank == covariate_size; }
  bool response_ok() const { return deficient_combos.empty(); }
  bool ok() const { return covariate_ok() && response_ok(); }
};

RankReport check_rank_conditions(const Eigen::MatrixXd& covariate_design,
                                 const std::vector<Eigen::MatrixXd>& response_designs);

}  // namespace densreg
