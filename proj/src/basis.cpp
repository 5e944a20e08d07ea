#include "densreg/basis.hpp"

#include <cmath>

#include "densreg/bspline.hpp"
#include "densreg/error.hpp"

namespace densreg {

ConstrainedBasis constrain_zero_integral(const std::vector<GridFunction>& raw) {
  if (raw.size() < 2) throw Error(ErrorKind::degenerate_basis, "need at least two raw functions");
  const auto& dom = raw.front().domain;
  Eigen::VectorXd c(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t m = 0; m < raw.size(); ++m) {
    require_same_domain(*dom, *raw[m].domain);
    c(static_cast<Eigen::Index>(m)) = integrate(raw[m]);
  }
  ConstrainedBasis out;
  out.transform = constraint_null_space(c);
  for (Eigen::Index k = 0; k < out.transform.cols(); ++k) {
    GridFunction f = GridFunction::constant(dom, 0.0);
    for (std::size_t m = 0; m < raw.size(); ++m) {
      const double z = out.transform(static_cast<Eigen::Index>(m), k);
      f.continuous += z * raw[m].continuous;
      f.atoms += z * raw[m].atoms;
    }
    out.functions.push_back(std::move(f));
  }
  return out;
}

std::vector<GridFunction> embed_mixed(const std::vector<GridFunction>& continuous,
                                      const std::vector<GridFunction>& discrete, const DomainPtr& mixed) {
  if (!mixed->has_interval() || mixed->atom_count() == 0)
    throw Error(ErrorKind::invalid_argument, "embedding needs a mixed domain");
  const auto D = static_cast<Eigen::Index>(mixed->atom_count());
  std::vector<GridFunction> out;
  for (const auto& f : continuous) {
    const auto& d = *f.domain;
    if (!d.has_interval() || d.atom_count() != 0 || d.interval().lower != mixed->interval().lower ||
        d.interval().upper != mixed->interval().upper || d.quadrature_nodes() != mixed->quadrature_nodes())
      throw Error(ErrorKind::domain_mismatch, "continuous function not on the mixed domain's interval");
    out.emplace_back(mixed, f.continuous, Eigen::VectorXd::Zero(D));
  }
  const double length = mixed->interval().upper - mixed->interval().lower;
  for (const auto& f : discrete) {
    const auto& d = *f.domain;
    if (d.has_interval() || static_cast<Eigen::Index>(d.atom_count()) != D + 1)
      throw Error(ErrorKind::domain_mismatch, "discrete function needs the atoms plus one extra point");
    for (Eigen::Index i = 0; i < D; ++i) {
      const auto& a = d.atoms()[static_cast<std::size_t>(i)];
      const auto& b = mixed->atoms()[static_cast<std::size_t>(i)];
      if (a.location != b.location || a.weight != b.weight)
        throw Error(ErrorKind::domain_mismatch, "discrete atoms differ from the mixed domain's atoms");
    }
    if (std::abs(d.atoms().back().weight - length) > 1e-12)
      throw Error(ErrorKind::weight_mismatch, "extra point weight must equal the interval length");
    const Eigen::Index q = mixed->nodes().size();
    out.emplace_back(mixed, Eigen::VectorXd::Constant(q, f.atoms(D)), f.atoms.head(D));
  }
  return out;
}

namespace {

std::vector<GridFunction> indicator_functions(const DomainPtr& dom) {
  std::vector<GridFunction> raw;
  const auto D = static_cast<Eigen::Index>(dom->atom_count());
  for (Eigen::Index d = 0; d < D; ++d) {
    GridFunction f = GridFunction::constant(dom, 0.0);
    f.atoms(d) = 1.0;
    raw.push_back(std::move(f));
  }
  return raw;
}

}  // namespace

ResponseBasis::ResponseBasis(DomainPtr domain, ResponseBasisSpec spec) : domain_(std::move(domain)), spec_(spec) {
  const auto& dom = *domain_;
  const auto D = static_cast<Eigen::Index>(dom.atom_count());
  std::vector<GridFunction> cont_functions, disc_functions;

  if (dom.has_interval()) {
    if (spec_.continuous_functions < 1)
      throw Error(ErrorKind::invalid_argument, "need at least one continuous response function");
    const int raw_count = spec_.continuous_functions + 1;
    knots_ = clamped_knots(dom.interval().lower, dom.interval().upper, raw_count, spec_.degree);
    auto sub = make_domain(dom.interval(), {}, dom.quadrature_nodes());
    const Eigen::Index q = sub->nodes().size();
    Eigen::MatrixXd raw(q, raw_count);
    for (Eigen::Index k = 0; k < q; ++k) raw.row(k) = bspline_eval(knots_, spec_.degree, sub->nodes()(k)).transpose();
    std::vector<GridFunction> raw_functions;
    for (int m = 0; m < raw_count; ++m) raw_functions.emplace_back(sub, raw.col(m), Eigen::VectorXd(0));
    auto constrained = constrain_zero_integral(raw_functions);
    continuous_transform_ = constrained.transform;
    cont_functions = std::move(constrained.functions);
    continuous_size_ = spec_.continuous_functions;
  }

  if (D > 0) {
    std::vector<Atom> atoms = dom.atoms();
    if (dom.has_interval()) {
      double extra = atoms.front().location;
      for (const auto& a : atoms) extra = std::max(extra, a.location);
      atoms.push_back({extra + 1.0, dom.interval().upper - dom.interval().lower});
    } else if (D < 2) {
      throw Error(ErrorKind::degenerate_basis, "a discrete-only domain needs at least two atoms");
    }
    auto sub = make_domain(std::nullopt, atoms, dom.quadrature_nodes());
    auto constrained = constrain_zero_integral(indicator_functions(sub));
    discrete_transform_ = constrained.transform;
    disc_functions = std::move(constrained.functions);
  }

  std::vector<GridFunction> all;
  if (dom.has_interval() && D > 0) {
    all = embed_mixed(cont_functions, disc_functions, domain_);
  } else if (dom.has_interval()) {
    for (auto& f : cont_functions) all.emplace_back(domain_, f.continuous, Eigen::VectorXd(0));
  } else {
    for (auto& f : disc_functions) all.emplace_back(domain_, Eigen::VectorXd(0), f.atoms);
  }

  const auto K = static_cast<Eigen::Index>(all.size());
  grid_values_.resize(dom.nodes().size(), K);
  atom_values_.resize(D, K);
  for (Eigen::Index m = 0; m < K; ++m) {
    grid_values_.col(m) = all[static_cast<std::size_t>(m)].continuous;
    atom_values_.col(m) = all[static_cast<std::size_t>(m)].atoms;
  }

  penalty_ = Eigen::MatrixXd::Zero(K, K);
  if (continuous_size_ > 0) {
    const Eigen::MatrixXd raw_pen = difference_penalty(spec_.continuous_functions + 1, spec_.penalty_order);
    penalty_.topLeftCorner(continuous_size_, continuous_size_) =
        continuous_transform_.transpose() * raw_pen * continuous_transform_;
  }
  const Eigen::Index kd = K - continuous_size_;
  penalty_.bottomRightCorner(kd, kd).setIdentity();
  penalty_ = (0.5 * (penalty_ + penalty_.transpose())).eval();

  gram_ = atom_values_.transpose() * dom.atom_weights().asDiagonal() * atom_values_;
  if (dom.has_interval()) gram_ += grid_values_.transpose() * dom.node_weights().asDiagonal() * grid_values_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
  const double hi = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * hi))
    throw Error(ErrorKind::degenerate_basis, "response basis functions are numerically dependent");
}

Eigen::VectorXd ResponseBasis::evaluate(double y) const {
  if (auto d = domain_->atom_at(y)) return atom_values_.row(static_cast<Eigen::Index>(*d)).transpose();
  if (!domain_->has_interval() || !(y >= domain_->interval().lower && y <= domain_->interval().upper))
    throw Error(ErrorKind::out_of_domain, "response value " + std::to_string(y) + " outside the domain");
  Eigen::VectorXd out(size());
  out.head(continuous_size_) =
      continuous_transform_.transpose() * bspline_eval(knots_, spec_.degree, y);
  if (discrete_size() > 0) out.tail(discrete_size()) = discrete_transform_.bottomRows(1).transpose();
  return out;
}

Eigen::MatrixXd ResponseBasis::evaluate(const std::vector<double>& ys) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ys.size()), size());
  for (std::size_t i = 0; i < ys.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = evaluate(ys[i]).transpose();
  return out;
}

std::vector<GridFunction> ResponseBasis::functions() const {
  std::vector<GridFunction> out;
  for (Eigen::Index m = 0; m < size(); ++m) out.emplace_back(domain_, grid_values_.col(m), atom_values_.col(m));
  return out;
}

GridFunction ResponseBasis::combine(const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() != size()) throw Error(ErrorKind::invalid_argument, "coefficient length differs from K_Y");
  return GridFunction(domain_, grid_values_ * coefficients, atom_values_ * coefficients);
}

Eigen::VectorXd tensor_row(const Eigen::VectorXd& bx, const Eigen::VectorXd& by) {
  Eigen::VectorXd out(bx.size() * by.size());
  for (Eigen::Index n = 0; n < bx.size(); ++n) out.segment(n * by.size(), by.size()) = bx(n) * by;
  return out;
}

Eigen::MatrixXd penalty_block(double xi_x, double xi_y, const Eigen::MatrixXd& px, const Eigen::MatrixXd& py) {
  if (xi_x < 0.0 || xi_y < 0.0) throw Error(ErrorKind::negative_smoothing, "smoothing parameters must be >= 0");
  const Eigen::Index kx = px.rows(), ky = py.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kx * ky, kx * ky);
  for (Eigen::Index n = 0; n < kx; ++n) {
    for (Eigen::Index n2 = 0; n2 < kx; ++n2) {
      auto blk = out.block(n * ky, n2 * ky, ky, ky);
      if (xi_x != 0.0 && px(n, n2) != 0.0) blk.diagonal().array() += xi_x * px(n, n2);
      if (n == n2 && xi_y != 0.0) blk += xi_y * py;
    }
  }
  return out;
}

}  // namespace densreg
