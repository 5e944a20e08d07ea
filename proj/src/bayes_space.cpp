#include "densreg/bayes_space.hpp"

#include <algorithm>
#include <cmath>

#include "densreg/error.hpp"

namespace densreg {

MixedDomain::MixedDomain(std::optional<Interval> interval, std::vector<Atom> atoms, int quadrature_nodes)
    : interval_(interval), atoms_(std::move(atoms)) {
  if (!interval_ && atoms_.empty()) throw Error(ErrorKind::invalid_argument, "domain needs an interval or atoms");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].weight > 0.0) || !std::isfinite(atoms_[i].weight))
      throw Error(ErrorKind::invalid_argument, "atom weights must be positive");
    if (!std::isfinite(atoms_[i].location)) throw Error(ErrorKind::invalid_argument, "atom location not finite");
    for (std::size_t j = 0; j < i; ++j)
      if (atoms_[j].location == atoms_[i].location)
        throw Error(ErrorKind::invalid_argument, "atoms must be distinct");
  }
  atom_weights_.resize(static_cast<Eigen::Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) atom_weights_(static_cast<Eigen::Index>(i)) = atoms_[i].weight;
  total_mass_ = atom_weights_.sum();

  if (interval_) {
    const double a = interval_->lower, b = interval_->upper;
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
      throw Error(ErrorKind::invalid_argument, "interval needs finite lower < upper");
    if (quadrature_nodes < 3 || quadrature_nodes % 2 == 0)
      throw Error(ErrorKind::invalid_argument, "quadrature node count must be odd and at least 3");
    nodes_count_ = quadrature_nodes;
    const Eigen::Index q = quadrature_nodes;
    nodes_.resize(q);
    node_weights_.resize(q);
    const double h = (b - a) / static_cast<double>(q - 1);
    for (Eigen::Index k = 0; k < q; ++k) {
      nodes_(k) = a + (b - a) * static_cast<double>(k) / static_cast<double>(q - 1);
      node_weights_(k) = (k == 0 || k == q - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    }
    nodes_(q - 1) = b;
    node_weights_ *= h / 3.0;
    total_mass_ += b - a;
  }
}

const Interval& MixedDomain::interval() const {
  if (!interval_) throw Error(ErrorKind::invalid_argument, "domain has no continuous part");
  return *interval_;
}

std::optional<std::size_t> MixedDomain::atom_at(double y) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].location == y) return i;
  return std::nullopt;
}

bool MixedDomain::contains(double y) const {
  if (atom_at(y)) return true;
  return interval_ && y >= interval_->lower && y <= interval_->upper;
}

bool MixedDomain::operator==(const MixedDomain& other) const {
  if (interval_.has_value() != other.interval_.has_value()) return false;
  if (interval_ && (interval_->lower != other.interval_->lower || interval_->upper != other.interval_->upper))
    return false;
  if (nodes_count_ != other.nodes_count_ || atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].location != other.atoms_[i].location || atoms_[i].weight != other.atoms_[i].weight) return false;
  return true;
}

DomainPtr make_domain(std::optional<Interval> interval, std::vector<Atom> atoms, int quadrature_nodes) {
  return std::make_shared<const MixedDomain>(interval, std::move(atoms), quadrature_nodes);
}

GridFunction::GridFunction(DomainPtr d, Eigen::VectorXd cont, Eigen::VectorXd at)
    : domain(std::move(d)), continuous(std::move(cont)), atoms(std::move(at)) {
  if (!domain) throw Error(ErrorKind::invalid_argument, "grid function without domain");
  if (continuous.size() != domain->nodes().size() ||
      atoms.size() != static_cast<Eigen::Index>(domain->atom_count()))
    throw Error(ErrorKind::domain_mismatch, "grid function size does not match its domain");
}

GridFunction GridFunction::constant(DomainPtr d, double value) {
  const Eigen::Index q = d->nodes().size();
  const auto D = static_cast<Eigen::Index>(d->atom_count());
  return GridFunction(d, Eigen::VectorXd::Constant(q, value), Eigen::VectorXd::Constant(D, value));
}

double GridFunction::evaluate(double y) const {
  if (auto idx = domain->atom_at(y)) return atoms(static_cast<Eigen::Index>(*idx));
  if (!domain->has_interval()) throw Error(ErrorKind::out_of_domain, "point is not an atom of a discrete domain");
  const auto& iv = domain->interval();
  if (!(y >= iv.lower && y <= iv.upper)) throw Error(ErrorKind::out_of_domain, "point outside the response domain");
  const Eigen::Index q = continuous.size();
  const double pos = (y - iv.lower) / (iv.upper - iv.lower) * static_cast<double>(q - 1);
  auto k = static_cast<Eigen::Index>(std::floor(pos));
  k = std::clamp<Eigen::Index>(k, 0, q - 2);
  const double t = pos - static_cast<double>(k);
  return (1.0 - t) * continuous(k) + t * continuous(k + 1);
}

void require_same_domain(const MixedDomain& a, const MixedDomain& b) {
  if (&a != &b && !(a == b)) throw Error(ErrorKind::domain_mismatch, "operands live on different domains");
}

double integrate(const GridFunction& f) {
  double s = f.atoms.dot(f.domain->atom_weights());
  if (f.domain->has_interval()) s += f.continuous.dot(f.domain->node_weights());
  return s;
}

namespace {

GridFunction centered(const GridFunction& g) {
  const double mean = integrate(g) / g.domain->total_mass();
  GridFunction out = g;
  out.continuous.array() -= mean;
  out.atoms.array() -= mean;
  return out;
}

}  // namespace

GridFunction clr(const GridFunction& density) {
  if ((density.continuous.array() <= 0.0).any() || (density.atoms.array() <= 0.0).any())
    throw Error(ErrorKind::non_positive_density, "density must be strictly positive on the grid and atoms");
  GridFunction logf(density.domain, density.continuous.array().log().matrix(), density.atoms.array().log().matrix());
  return centered(logf);
}

GridFunction BayesDensity::probability() const {
  const double shift = std::max(clr_.continuous.size() ? clr_.continuous.maxCoeff() : -INFINITY,
                                clr_.atoms.size() ? clr_.atoms.maxCoeff() : -INFINITY);
  GridFunction e(clr_.domain, (clr_.continuous.array() - shift).exp().matrix(),
                 (clr_.atoms.array() - shift).exp().matrix());
  const double z = integrate(e);
  e.continuous /= z;
  e.atoms /= z;
  return e;
}

BayesDensity BayesDensity::from_density(const GridFunction& density) {
  BayesDensity out;
  out.clr_ = densreg::clr(density);
  return out;
}

BayesDensity inv_clr(const GridFunction& g) {
  BayesDensity out;
  GridFunction c = g;
  auto clamp = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) > clr_clamp) { v(i) = clr_clamp; out.clamped_ = true; }
      else if (v(i) < -clr_clamp) { v(i) = -clr_clamp; out.clamped_ = true; }
    }
  };
  clamp(c.continuous);
  clamp(c.atoms);
  out.clr_ = centered(c);
  return out;
}

BayesDensity perturb(const BayesDensity& f, const BayesDensity& g) {
  require_same_domain(*f.domain(), *g.domain());
  GridFunction s(f.domain(), f.clr().continuous + g.clr().continuous, f.clr().atoms + g.clr().atoms);
  return inv_clr(s);
}

BayesDensity power(double alpha, const BayesDensity& f) {
  GridFunction s(f.domain(), alpha * f.clr().continuous, alpha * f.clr().atoms);
  return inv_clr(s);
}

BayesDensity difference(const BayesDensity& f, const BayesDensity& g) { return perturb(f, power(-1.0, g)); }

double inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_domain(*f.domain, *g.domain);
  GridFunction prod(f.domain, f.continuous.cwiseProduct(g.continuous), f.atoms.cwiseProduct(g.atoms));
  return integrate(prod);
}

double inner_product(const BayesDensity& f, const BayesDensity& g) { return inner_product(f.clr(), g.clr()); }

double norm(const BayesDensity& f) { return std::sqrt(inner_product(f, f)); }

}  // namespace densreg
