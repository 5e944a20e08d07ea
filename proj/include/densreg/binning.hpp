#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "densreg/bayes_space.hpp"
#include "densreg/covariates.hpp"

namespace densreg {

/// Unique covariate combinations in first-occurrence order (exact, bitwise equality).
struct Grouping {
  CovariateTable combos;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> combo_of;
};

Grouping group_by_covariates(const CovariateTable& covariates);

/// Bins [c_{g-1}, c_g) of the continuous interval; the last bin is closed.
class Partition {
 public:
  explicit Partition(std::vector<double> cuts);
  static std::shared_ptr<const Partition> equidistant(double lower, double upper, int bins);

  std::size_t size() const { return cuts_.size() - 1; }
  const std::vector<double>& cuts() const { return cuts_; }
  double width(std::size_t g) const { return cuts_[g + 1] - cuts_[g]; }
  double midpoint(std::size_t g) const { return 0.5 * (cuts_[g] + cuts_[g + 1]); }
  std::optional<std::size_t> locate(double y) const;

 private:
  std::vector<double> cuts_;
};

using PartitionPtr = std::shared_ptr<const Partition>;

struct Cell {
  /// Integer for raw data; weighted designs may carry effective counts.
  double count = 0.0;
  double representative = 0.0;
  double width = 0.0;
  /// Sample-weight factor v_g.
  double weight = 1.0;
  /// log(width) - log(weight).
  double offset = 0.0;
  bool atom = false;
};

/// Cells of one combo: G continuous bins followed by the atoms.
struct ComboCells {
  std::vector<Cell> cells;
  PartitionPtr partition;
  /// Cell index of every member observation, in member order.
  std::vector<std::size_t> assignment;
  /// Sample weights of the members (empty when unweighted).
  std::vector<double> member_weights;
  double total() const;
};

/// Cell index per observation; continuous bins first, then atoms.
std::vector<std::size_t> assign_cells(const PartitionPtr& partition, const MixedDomain& domain,
                                      std::span<const double> ys);

std::vector<Cell> bin_responses(const PartitionPtr& partition, const MixedDomain& domain,
                                std::span<const double> ys);

/// Sets v_g = (sum of weights in the cell) / n_g (1 for empty cells) and shifts offsets by -log v_g.
void apply_sample_weights(std::vector<Cell>& cells, const std::vector<std::size_t>& assignment,
                          std::span<const double> weights);

struct BinnedDesign {
  DomainPtr domain;
  CovariateTable combos;
  std::vector<ComboCells> cells;
  /// Observation indices per combo.
  std::vector<std::vector<std::size_t>> members;
  std::size_t observations = 0;

  std::size_t combo_count() const { return cells.size(); }
};

/// Groups observations, bins each combo on the shared partition and applies optional weights.
BinnedDesign bin_observations(const DomainPtr& domain, const CovariateTable& covariates, std::span<const double> ys,
                              const PartitionPtr& partition, std::span<const double> weights = {});

/// Replaces combo l by one combo per subset of its members (local indices), keeping
/// the combo's cell representatives.
BinnedDesign split_partition(const BinnedDesign& design, std::size_t combo,
                             const std::vector<std::vector<std::size_t>>& subsets);

/// Same data with counts replaced by v_g n_g and unit weights.
BinnedDesign to_weighted_counts(const BinnedDesign& design);

}  // namespace densreg
