#include "densreg/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "densreg/error.hpp"

namespace densreg {

GridFunction effect_function(const Model& model, const Eigen::VectorXd& theta, const EffectQuery& query) {
  return model.response().combine(effect_matrix(model, query) * theta);
}

OddsRatio odds_ratio(const GridFunction& effect, double s, double t) {
  OddsRatio r;
  r.log_ratio = effect.evaluate(s) - effect.evaluate(t);
  r.ratio = std::exp(r.log_ratio);
  return r;
}

namespace {

std::vector<Interval> runs(const Eigen::VectorXd& nodes, const std::vector<bool>& mask, bool want) {
  std::vector<Interval> out;
  const auto q = static_cast<std::size_t>(nodes.size());
  std::size_t k = 0;
  while (k < q) {
    if (mask[k] != want) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < q && mask[end + 1] == want) ++end;
    out.push_back({nodes(static_cast<Eigen::Index>(k)), nodes(static_cast<Eigen::Index>(end))});
    k = end + 1;
  }
  return out;
}

}  // namespace

MassShiftSets mass_shift_sets(const GridFunction& effect, double threshold) {
  MassShiftSets out;
  out.threshold = threshold;
  for (Eigen::Index k = 0; k < effect.continuous.size(); ++k) out.plus_nodes.push_back(effect.continuous(k) >= threshold);
  for (Eigen::Index d = 0; d < effect.atoms.size(); ++d) out.plus_atoms.push_back(effect.atoms(d) >= threshold);
  out.plus = runs(effect.domain->nodes(), out.plus_nodes, true);
  out.minus = runs(effect.domain->nodes(), out.plus_nodes, false);
  return out;
}

double set_mass(const BayesDensity& density, const MassShiftSets& sets, bool plus) {
  const GridFunction p = density.probability();
  const auto& dom = *p.domain;
  if (sets.plus_nodes.size() != static_cast<std::size_t>(p.continuous.size()) ||
      sets.plus_atoms.size() != static_cast<std::size_t>(p.atoms.size()))
    throw Error(ErrorKind::domain_mismatch, "sets and density live on different domains");
  double mass = 0.0;
  for (Eigen::Index k = 0; k < p.continuous.size(); ++k)
    if (sets.plus_nodes[static_cast<std::size_t>(k)] == plus) mass += dom.node_weights()(k) * p.continuous(k);
  for (Eigen::Index d = 0; d < p.atoms.size(); ++d)
    if (sets.plus_atoms[static_cast<std::size_t>(d)] == plus) mass += dom.atom_weights()(d) * p.atoms(d);
  return mass;
}

ReferenceCoding::ReferenceCoding(const Model& model, std::string covariate, double value)
    : model_(&model), covariate_(std::move(covariate)), value_(value) {
  const auto& terms = model.terms();
  partner_.assign(terms.size(), -1);
  bool any = false;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto& s = terms[j].spec();
    const bool depends = (s.kind == TermKind::linear || s.kind == TermKind::smooth || s.kind == TermKind::varying) &&
                         s.covariate == covariate_;
    if (!depends) continue;
    any = true;
    const std::set<std::string> group(s.factors.begin(), s.factors.end());
    for (std::size_t p = 0; p < terms.size(); ++p) {
      const auto& ps = terms[p].spec();
      const bool match = s.kind == TermKind::varying
                             ? ps.kind == TermKind::categorical &&
                                   std::set<std::string>(ps.factors.begin(), ps.factors.end()) == group
                             : ps.kind == TermKind::intercept;
      if (match) {
        partner_[j] = static_cast<long>(p);
        break;
      }
    }
    if (partner_[j] < 0)
      throw Error(ErrorKind::missing_term, "term '" + terms[j].label() + "' has no intercept-type partner term");
  }
  if (!any) throw Error(ErrorKind::missing_term, "no term depends on covariate '" + covariate_ + "'");
}

std::size_t ReferenceCoding::partner(std::size_t term) const {
  if (term >= partner_.size() || partner_[term] < 0)
    throw Error(ErrorKind::missing_term, "term is not shifted by the reference coding");
  return static_cast<std::size_t>(partner_[term]);
}

EffectQuery ReferenceCoding::query(std::size_t term, const CovariateTable& x, std::size_t row) const {
  if (term >= partner_.size()) throw Error(ErrorKind::missing_term, "term index out of range");
  const CovariateTable one = x.row(row);
  const CovariateTable at_ref = one.with_numeric_value(covariate_, value_);
  EffectQuery q{{term, one, 1.0}};
  if (partner_[term] >= 0) {
    q.push_back({term, at_ref, -1.0});
    return q;
  }
  for (std::size_t j = 0; j < partner_.size(); ++j)
    if (partner_[j] == static_cast<long>(term)) q.push_back({j, at_ref, 1.0});
  return q;
}

}  // namespace densreg
