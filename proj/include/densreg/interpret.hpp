#pragma once

#include <string>
#include <vector>

#include "densreg/bayes_space.hpp"
#include "densreg/fit.hpp"
#include "densreg/inference.hpp"
#include "densreg/model.hpp"

namespace densreg {

/// clr of an effect on the grid and atoms.
GridFunction effect_function(const Model& model, const Eigen::VectorXd& theta, const EffectQuery& query);

struct OddsRatio {
  double log_ratio = 0.0;
  double ratio = 1.0;
};

/// Log odds ratio clr(s) - clr(t) of an effect; exact at atoms, linear between grid nodes.
OddsRatio odds_ratio(const GridFunction& effect, double s, double t);

/// A+ = {effect >= threshold} and its complement A-, as maximal closed node intervals plus atoms.
struct MassShiftSets {
  double threshold = 0.0;
  std::vector<Interval> plus;
  std::vector<Interval> minus;
  std::vector<bool> plus_nodes;
  std::vector<bool> plus_atoms;
};

MassShiftSets mass_shift_sets(const GridFunction& effect, double threshold);

/// Probability mass of a density on A+ (or A-), using the domain's quadrature.
double set_mass(const BayesDensity& density, const MassShiftSets& sets, bool plus);

/// Re-expresses effects relative to a reference value of a continuous covariate: the terms
/// depending on it lose their value at the reference, which moves to the matching
/// intercept-type term. Predictions are unchanged.
class ReferenceCoding {
 public:
  ReferenceCoding(const Model& model, std::string covariate, double value);

  const std::string& covariate() const { return covariate_; }
  double value() const { return value_; }
  /// Query for the transformed effect of term j at row `row` of x.
  EffectQuery query(std::size_t term, const CovariateTable& x, std::size_t row = 0) const;
  /// Intercept-type partner of a shifted term.
  std::size_t partner(std::size_t term) const;

 private:
  const Model* model_;
  std::string covariate_;
  double value_;
  std::vector<long> partner_;
};

}  // namespace densreg
