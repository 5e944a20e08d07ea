#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "densreg/binning.hpp"
#include "densreg/fit.hpp"
#include "densreg/model.hpp"
#include "densreg/random.hpp"

namespace densreg {

/// Probabilities of the cells (bins, then atoms) under the density whose clr is
/// basis * coefficients, integrated exactly up to Gauss-Legendre precision.
Eigen::VectorXd cell_probabilities(const ResponseBasis& basis, const Eigen::VectorXd& coefficients,
                                   const PartitionPtr& partition);

/// Cell representatives (bin midpoints or atom locations) of the given partition.
std::vector<double> cell_representatives(const PartitionPtr& partition, const MixedDomain& domain);

/// n draws at the cell representatives with the truth's cell probabilities.
std::vector<double> sample_binned(const ResponseBasis& basis, const Eigen::VectorXd& coefficients, std::size_t n,
                                  const PartitionPtr& partition, std::uint64_t seed);

/// sum ||e_i - ehat_i||^2 / sum ||e_i||^2 in the Bayes norm.
double rel_mse(const std::vector<BayesDensity>& estimates, const std::vector<BayesDensity>& truths);
/// Same quantity for clr coefficient vectors with the basis Gram matrix.
double rel_mse(const Eigen::MatrixXd& gram, const std::vector<Eigen::VectorXd>& estimates,
               const std::vector<Eigen::VectorXd>& truths);

struct SimScenario {
  ModelSpec spec;
  /// Covariate population; combos are drawn uniformly from its rows.
  CovariateTable combos;
  /// True coefficients in the layout of the model compiled on `combos`.
  Eigen::VectorXd theta;
  std::size_t observations = 2000;
  /// Bin counts; draws happen at the largest, which every other must divide.
  std::vector<int> bins{100};
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  double level = 0.95;
  FitOptions fit;
  /// Smoothing used in every fit; the model default when empty.
  Smoothing smoothing;
};

struct EffectCoverage {
  std::string name;
  int bins = 0;
  std::size_t simultaneous_covered = 0;
  std::size_t simultaneous_total = 0;
  std::size_t pointwise_covered = 0;
  std::size_t pointwise_total = 0;
  std::vector<double> relmse;

  double simultaneous_rate() const;
  double pointwise_rate() const;
  double median_relmse() const;
};

struct ReplicationRecord {
  std::size_t replication = 0;
  int bins = 0;
  std::string effect;
  double relmse = 0.0;
  std::string region;
  std::size_t covered = 0;
  std::size_t total = 0;
};

struct CoverageReport {
  /// One entry per (bins, effect); effects are the terms followed by "prediction".
  std::vector<EffectCoverage> effects;
  std::vector<ReplicationRecord> records;
  std::size_t failures = 0;

  const EffectCoverage& find(const std::string& name, int bins) const;
};

/// Model compiled on the scenario's population (centering uses the population, so the
/// truth is representable in every replication).
Model scenario_model(const SimScenario& scenario);

/// Draws one replication: covariate rows and responses.
Observations draw_replication(const SimScenario& scenario, const Model& model, std::size_t replication);

CoverageReport coverage_experiment(const SimScenario& scenario);

}  // namespace densreg
