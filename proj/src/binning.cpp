#include "densreg/binning.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "densreg/error.hpp"

namespace densreg {

Grouping group_by_covariates(const CovariateTable& covariates) {
  Grouping out;
  const std::size_t n = covariates.rows();
  std::map<std::string, std::size_t> seen;
  std::vector<std::size_t> firsts;
  out.combo_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string key;
    for (std::size_t c = 0; c < covariates.columns(); ++c) {
      const auto& col = covariates.column(c);
      if (const auto* v = std::get_if<std::vector<double>>(&col)) {
        char bytes[sizeof(double)];
        std::memcpy(bytes, &(*v)[i], sizeof(double));
        key.append(bytes, sizeof(double));
      } else {
        const auto& s = std::get<std::vector<std::string>>(col)[i];
        key += std::to_string(s.size());
        key += ':';
        key += s;
      }
    }
    auto [it, inserted] = seen.emplace(std::move(key), firsts.size());
    if (inserted) {
      firsts.push_back(i);
      out.members.emplace_back();
    }
    out.combo_of[i] = it->second;
    out.members[it->second].push_back(i);
  }
  out.combos = covariates.select_rows(firsts);
  return out;
}

Partition::Partition(std::vector<double> cuts) : cuts_(std::move(cuts)) {
  if (cuts_.size() < 2) throw Error(ErrorKind::invalid_argument, "partition needs at least one bin");
  for (std::size_t g = 1; g < cuts_.size(); ++g)
    if (!(cuts_[g] > cuts_[g - 1])) throw Error(ErrorKind::invalid_argument, "partition cuts must increase");
}

PartitionPtr Partition::equidistant(double lower, double upper, int bins) {
  if (bins < 1) throw Error(ErrorKind::invalid_argument, "need at least one bin");
  std::vector<double> cuts(static_cast<std::size_t>(bins) + 1);
  for (int g = 0; g <= bins; ++g) cuts[static_cast<std::size_t>(g)] = lower + (upper - lower) * g / bins;
  cuts.back() = upper;
  return std::make_shared<const Partition>(std::move(cuts));
}

std::optional<std::size_t> Partition::locate(double y) const {
  if (!(y >= cuts_.front() && y <= cuts_.back())) return std::nullopt;
  if (y == cuts_.back()) return size() - 1;
  auto it = std::upper_bound(cuts_.begin(), cuts_.end(), y);
  return static_cast<std::size_t>(it - cuts_.begin()) - 1;
}

double ComboCells::total() const {
  double s = 0.0;
  for (const auto& c : cells) s += c.count;
  return s;
}

std::vector<std::size_t> assign_cells(const PartitionPtr& partition, const MixedDomain& domain,
                                      std::span<const double> ys) {
  const std::size_t G = partition ? partition->size() : 0;
  if (domain.has_interval() && !partition) throw Error(ErrorKind::invalid_argument, "continuous domain needs bins");
  if (partition && (partition->cuts().front() != domain.interval().lower ||
                    partition->cuts().back() != domain.interval().upper))
    throw Error(ErrorKind::invalid_argument, "partition must span the response interval");
  std::vector<std::size_t> out(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    if (auto d = domain.atom_at(y)) {
      out[i] = G + *d;
    } else if (auto g = partition ? partition->locate(y) : std::nullopt) {
      out[i] = *g;
    } else {
      throw Error(ErrorKind::observation_outside_domain,
                  "observation " + std::to_string(i) + " (value " + std::to_string(y) + ") outside the response domain");
    }
  }
  return out;
}

namespace {

std::vector<Cell> empty_cells(const PartitionPtr& partition, const MixedDomain& domain) {
  std::vector<Cell> cells;
  if (partition) {
    for (std::size_t g = 0; g < partition->size(); ++g) {
      Cell c;
      c.representative = partition->midpoint(g);
      c.width = partition->width(g);
      c.offset = std::log(c.width);
      cells.push_back(c);
    }
  }
  for (const auto& a : domain.atoms()) {
    Cell c;
    c.representative = a.location;
    c.width = a.weight;
    c.offset = std::log(a.weight);
    c.atom = true;
    cells.push_back(c);
  }
  return cells;
}

}  // namespace

std::vector<Cell> bin_responses(const PartitionPtr& partition, const MixedDomain& domain,
                                std::span<const double> ys) {
  auto assignment = assign_cells(partition, domain, ys);
  auto cells = empty_cells(partition, domain);
  std::vector<std::set<double>> distinct(cells.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    cells[assignment[i]].count += 1.0;
    if (!cells[assignment[i]].atom) distinct[assignment[i]].insert(ys[i]);
  }
  for (std::size_t g = 0; g < cells.size(); ++g)
    if (distinct[g].size() == 1) cells[g].representative = *distinct[g].begin();
  return cells;
}

void apply_sample_weights(std::vector<Cell>& cells, const std::vector<std::size_t>& assignment,
                          std::span<const double> weights) {
  if (weights.size() != assignment.size())
    throw Error(ErrorKind::invalid_argument, "one weight per observation required");
  std::vector<double> sums(cells.size(), 0.0), counts(cells.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorKind::non_positive_weight, "weight of observation " + std::to_string(i) + " is not positive");
    sums[assignment[i]] += weights[i];
    counts[assignment[i]] += 1.0;
  }
  for (std::size_t g = 0; g < cells.size(); ++g) {
    cells[g].weight = counts[g] > 0.0 ? sums[g] / counts[g] : 1.0;
    cells[g].offset = std::log(cells[g].width) - std::log(cells[g].weight);
  }
}

BinnedDesign bin_observations(const DomainPtr& domain, const CovariateTable& covariates, std::span<const double> ys,
                              const PartitionPtr& partition, std::span<const double> weights) {
  if (covariates.rows() != ys.size()) throw Error(ErrorKind::invalid_argument, "covariate and response rows differ");
  if (!weights.empty() && weights.size() != ys.size())
    throw Error(ErrorKind::invalid_argument, "one weight per observation required");
  BinnedDesign out;
  out.domain = domain;
  out.observations = ys.size();
  Grouping grouping = group_by_covariates(covariates);
  out.combos = std::move(grouping.combos);
  out.members = std::move(grouping.members);
  for (const auto& members : out.members) {
    std::vector<double> y;
    for (auto i : members) y.push_back(ys[i]);
    ComboCells cc;
    cc.partition = partition;
    cc.assignment = assign_cells(partition, *domain, y);
    cc.cells = bin_responses(partition, *domain, y);
    if (!weights.empty()) {
      for (auto i : members) cc.member_weights.push_back(weights[i]);
      apply_sample_weights(cc.cells, cc.assignment, cc.member_weights);
    }
    out.cells.push_back(std::move(cc));
  }
  return out;
}

BinnedDesign split_partition(const BinnedDesign& design, std::size_t combo,
                             const std::vector<std::vector<std::size_t>>& subsets) {
  if (combo >= design.combo_count()) throw Error(ErrorKind::invalid_argument, "combo index out of range");
  const ComboCells& parent = design.cells[combo];
  const std::size_t n = parent.assignment.size();
  std::vector<int> hit(n, 0);
  for (const auto& s : subsets)
    for (auto i : s) {
      if (i >= n) throw Error(ErrorKind::not_a_partition, "subset index beyond the combo's observations");
      ++hit[i];
    }
  for (std::size_t i = 0; i < n; ++i)
    if (hit[i] != 1) throw Error(ErrorKind::not_a_partition, "subsets must cover every observation exactly once");

  BinnedDesign out;
  out.domain = design.domain;
  out.observations = design.observations;
  std::vector<std::size_t> rows;
  for (std::size_t l = 0; l < design.combo_count(); ++l) {
    if (l != combo) {
      rows.push_back(l);
      out.cells.push_back(design.cells[l]);
      out.members.push_back(design.members[l]);
      continue;
    }
    for (const auto& s : subsets) {
      ComboCells cc;
      cc.partition = parent.partition;
      cc.cells = parent.cells;
      for (auto& c : cc.cells) {
        c.count = 0.0;
        c.weight = 1.0;
        c.offset = std::log(c.width);
      }
      std::vector<std::size_t> members;
      for (auto i : s) {
        cc.assignment.push_back(parent.assignment[i]);
        cc.cells[parent.assignment[i]].count += 1.0;
        if (!parent.member_weights.empty()) cc.member_weights.push_back(parent.member_weights[i]);
        members.push_back(design.members[combo][i]);
      }
      if (!cc.member_weights.empty()) apply_sample_weights(cc.cells, cc.assignment, cc.member_weights);
      rows.push_back(l);
      out.cells.push_back(std::move(cc));
      out.members.push_back(std::move(members));
    }
  }
  out.combos = design.combos.select_rows(rows);
  return out;
}

BinnedDesign to_weighted_counts(const BinnedDesign& design) {
  BinnedDesign out = design;
  for (auto& cc : out.cells) {
    for (auto& c : cc.cells) {
      c.count *= c.weight;
      c.weight = 1.0;
      c.offset = std::log(c.width);
    }
    cc.member_weights.clear();
  }
  return out;
}

}  // namespace densreg
