#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

namespace densreg {

struct Atom {
  double location = 0.0;
  double weight = 1.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Reference measure: Lebesgue on an optional interval plus weighted point masses.
/// Integrals use composite Simpson on a uniform grid of odd size over the interval.
class MixedDomain {
 public:
  MixedDomain(std::optional<Interval> interval, std::vector<Atom> atoms, int quadrature_nodes = 1001);

  bool has_interval() const { return interval_.has_value(); }
  const Interval& interval() const;
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t atom_count() const { return atoms_.size(); }
  int quadrature_nodes() const { return nodes_count_; }

  /// Grid nodes (empty without interval).
  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Simpson weights matching nodes().
  const Eigen::VectorXd& node_weights() const { return node_weights_; }
  const Eigen::VectorXd& atom_weights() const { return atom_weights_; }
  /// mu(Y) = interval length + sum of atom weights.
  double total_mass() const { return total_mass_; }

  /// Index of the atom located exactly at y, if any.
  std::optional<std::size_t> atom_at(double y) const;
  bool contains(double y) const;

  bool operator==(const MixedDomain& other) const;

 private:
  std::optional<Interval> interval_;
  std::vector<Atom> atoms_;
  int nodes_count_ = 0;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd node_weights_;
  Eigen::VectorXd atom_weights_;
  double total_mass_ = 0.0;
};

using DomainPtr = std::shared_ptr<const MixedDomain>;

DomainPtr make_domain(std::optional<Interval> interval, std::vector<Atom> atoms, int quadrature_nodes = 1001);

/// Values of a function at the grid nodes and at the atoms.
struct GridFunction {
  DomainPtr domain;
  Eigen::VectorXd continuous;
  Eigen::VectorXd atoms;

  GridFunction() = default;
  GridFunction(DomainPtr d, Eigen::VectorXd cont, Eigen::VectorXd at);
  static GridFunction constant(DomainPtr d, double value);

  /// Atom value when y is an atom location, otherwise linear interpolation between nodes.
  double evaluate(double y) const;
};

void require_same_domain(const MixedDomain& a, const MixedDomain& b);

double integrate(const GridFunction& f);
GridFunction clr(const GridFunction& density);

/// Element of the Bayes space, stored through its centered clr.
class BayesDensity {
 public:
  BayesDensity() = default;
  const GridFunction& clr() const { return clr_; }
  const DomainPtr& domain() const { return clr_.domain; }
  /// Probability representative: integrates to one under mu.
  GridFunction probability() const;
  /// True when inv_clr had to clamp extreme values.
  bool clamped() const { return clamped_; }

  static BayesDensity from_density(const GridFunction& density);

 private:
  friend BayesDensity inv_clr(const GridFunction& g);
  GridFunction clr_;
  bool clamped_ = false;
};

inline constexpr double clr_clamp = 700.0;

BayesDensity inv_clr(const GridFunction& g);
BayesDensity perturb(const BayesDensity& f, const BayesDensity& g);
BayesDensity power(double alpha, const BayesDensity& f);
/// f minus g in the Bayes space.
BayesDensity difference(const BayesDensity& f, const BayesDensity& g);
double inner_product(const BayesDensity& f, const BayesDensity& g);
double inner_product(const GridFunction& f, const GridFunction& g);
double norm(const BayesDensity& f);

}  // namespace densreg
