#include "densreg/objective.hpp"

#include <cmath>
#include <map>

#include "densreg/error.hpp"

namespace densreg {

Eigen::MatrixXd BlockSymmetric::dense() const {
  const Eigen::Index m = leading.rows(), t = tail.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m + t, m + t);
  out.topLeftCorner(m, m) = leading;
  if (t > 0) {
    out.topRightCorner(m, t) = coupling;
    out.bottomLeftCorner(t, m) = coupling.transpose();
    out.bottomRightCorner(t, t).diagonal() = tail;
  }
  return out;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_positive(const Eigen::MatrixXd& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::singular_hessian, "Fisher information is not positive definite");
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  if (d.size() > 0 && !(d.minCoeff() * d.minCoeff() > 1e-15 * d.maxCoeff() * d.maxCoeff()))
    throw Error(ErrorKind::singular_hessian, "Fisher information is numerically singular");
  return llt;
}

Eigen::MatrixXd schur_complement(const BlockSymmetric& F) {
  if (F.tail.size() > 0 && !(F.tail.array() > 0.0).all())
    throw Error(ErrorKind::singular_hessian, "Fisher information is not positive definite");
  if (F.tail.size() == 0) return F.leading;
  return F.leading - F.coupling * F.tail.cwiseInverse().asDiagonal() * F.coupling.transpose();
}

}  // namespace

Eigen::VectorXd solve_positive(const BlockSymmetric& F, const Eigen::VectorXd& rhs) {
  const Eigen::Index m = F.leading.rows(), t = F.tail.size();
  auto llt = factor_positive(schur_complement(F));
  if (t == 0) return llt.solve(rhs);
  const Eigen::VectorXd dinv = F.tail.cwiseInverse();
  Eigen::VectorXd out(m + t);
  out.head(m) = llt.solve(rhs.head(m) - F.coupling * dinv.cwiseProduct(rhs.tail(t)));
  out.tail(t) = dinv.cwiseProduct(rhs.tail(t) - F.coupling.transpose() * out.head(m));
  return out;
}

Eigen::MatrixXd inverse_leading(const BlockSymmetric& F, Eigen::Index k) {
  const Eigen::MatrixXd S = schur_complement(F);
  auto llt = factor_positive(S);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
  return inv.topLeftCorner(k, k);
}

Objective::Objective(Eigen::MatrixXd penalty) : penalty_(std::move(penalty)) {
  if (penalty_.rows() != penalty_.cols()) throw Error(ErrorKind::invalid_argument, "penalty must be square");
  // theta^T P theta as a sum of squares avoids cancellation when P is large
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(penalty_);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  penalty_root_ = root.asDiagonal() * es.eigenvectors().transpose();
}

void Objective::add_penalty(const Eigen::VectorXd& params, Evaluation& ev, bool derivatives) const {
  const Eigen::Index K = theta_dimension();
  const auto theta = params.head(K);
  ev.value = ev.loglik - (penalty_root_ * theta).squaredNorm();
  if (derivatives) {
    ev.gradient.head(K) -= 2.0 * (penalty_ * theta);
    ev.fisher.leading.topLeftCorner(K, K) += 2.0 * penalty_;
  }
}

Eigen::VectorXd CellRows::times(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd out = *shared * beta;
  for (std::size_t i = 0; i < replaced.size(); ++i)
    out(replaced[i]) = replacement.row(static_cast<Eigen::Index>(i)).dot(beta);
  return out;
}

Eigen::VectorXd CellRows::transpose_times(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out = shared->transpose() * w;
  for (std::size_t i = 0; i < replaced.size(); ++i) {
    const Eigen::Index g = replaced[i];
    out += w(g) * (replacement.row(static_cast<Eigen::Index>(i)) - shared->row(g)).transpose();
  }
  return out;
}

Eigen::MatrixXd CellRows::weighted_gram(const Eigen::VectorXd& w) const {
  Eigen::MatrixXd out = shared->transpose() * w.asDiagonal() * *shared;
  for (std::size_t i = 0; i < replaced.size(); ++i) {
    const Eigen::Index g = replaced[i];
    const Eigen::VectorXd r = replacement.row(static_cast<Eigen::Index>(i)).transpose();
    const Eigen::VectorXd s = shared->row(g).transpose();
    out += w(g) * (r * r.transpose() - s * s.transpose());
  }
  return out;
}

ComboRow ComboRow::from(const Eigen::VectorXd& row) {
  ComboRow out;
  out.values = row;
  for (Eigen::Index n = 0; n < row.size(); ++n)
    if (row(n) != 0.0) out.nonzero.push_back(n);
  return out;
}

std::vector<CellRows> cell_rows(const ResponseBasis& basis, const BinnedDesign& design) {
  std::map<const Partition*, std::shared_ptr<const Eigen::MatrixXd>> shared;
  std::vector<CellRows> out;
  const auto& domain = *design.domain;
  for (const auto& cc : design.cells) {
    auto& sh = shared[cc.partition.get()];
    std::vector<double> defaults;
    if (cc.partition)
      for (std::size_t g = 0; g < cc.partition->size(); ++g) defaults.push_back(cc.partition->midpoint(g));
    for (const auto& a : domain.atoms()) defaults.push_back(a.location);
    if (defaults.size() != cc.cells.size()) throw Error(ErrorKind::invalid_argument, "cells do not match partition");
    if (!sh) sh = std::make_shared<const Eigen::MatrixXd>(basis.evaluate(defaults));
    CellRows rows;
    rows.shared = sh;
    std::vector<double> reps;
    for (std::size_t g = 0; g < cc.cells.size(); ++g) {
      if (cc.cells[g].representative != defaults[g]) {
        rows.replaced.push_back(static_cast<Eigen::Index>(g));
        reps.push_back(cc.cells[g].representative);
      }
    }
    rows.replacement = basis.evaluate(reps);
    out.push_back(std::move(rows));
  }
  return out;
}

namespace {

Eigen::VectorXd combo_beta(const ComboRow& b, const Eigen::VectorXd& theta, Eigen::Index ky) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ky);
  for (auto n : b.nonzero) beta += b.values(n) * theta.segment(n * ky, ky);
  return beta;
}

void scatter(const ComboRow& b, Eigen::Index ky, const Eigen::VectorXd& grad_beta, const Eigen::MatrixXd& fisher_beta,
             Eigen::VectorXd& grad, Eigen::MatrixXd& fisher, bool derivatives) {
  if (!derivatives) return;
  for (auto n : b.nonzero) {
    grad.segment(n * ky, ky) += b.values(n) * grad_beta;
    for (auto n2 : b.nonzero) fisher.block(n * ky, n2 * ky, ky, ky) += (b.values(n) * b.values(n2)) * fisher_beta;
  }
}

/// Shared log-partition kernel: value s^T beta - n log sum_k w_k exp(r_k^T beta).
void softmax_term(const CellRows& rows, const Eigen::VectorXd& weights, const Eigen::VectorXd& stat, double total,
                  const Eigen::VectorXd& beta, double& loglik, Eigen::VectorXd* grad_beta, Eigen::MatrixXd* fisher_beta) {
  const Eigen::VectorXd eta = rows.times(beta);
  const double m = eta.maxCoeff();
  const Eigen::VectorXd e = weights.cwiseProduct((eta.array() - m).exp().matrix());
  const double z = e.sum();
  loglik += stat.dot(beta) - total * (m + std::log(z));
  if (grad_beta) {
    const Eigen::VectorXd p = e / z;
    const Eigen::VectorXd mean = rows.transpose_times(p);
    *grad_beta = stat - total * mean;
    *fisher_beta = total * (rows.weighted_gram(p) - mean * mean.transpose());
  }
}

void check_length(const Eigen::VectorXd& params, Eigen::Index dim) {
  if (params.size() != dim) throw Error(ErrorKind::invalid_argument, "parameter vector has the wrong length");
}

}  // namespace

BayesObjective::BayesObjective(const Model& model, const CovariateTable& covariates, std::span<const double> ys,
                               std::span<const double> weights, Eigen::MatrixXd penalty)
    : Objective(std::move(penalty)), kx_(model.covariate_size()), ky_(model.response_size()) {
  if (theta_dimension() != model.coefficient_size()) throw Error(ErrorKind::invalid_argument, "penalty size differs from K");
  if (covariates.rows() != ys.size()) throw Error(ErrorKind::invalid_argument, "covariate and response rows differ");
  if (!weights.empty() && weights.size() != ys.size())
    throw Error(ErrorKind::invalid_argument, "one weight per observation required");
  const auto& basis = model.response();
  const Grouping grouping = group_by_covariates(covariates);
  const Eigen::MatrixXd bx = model.design(grouping.combos);
  for (std::size_t l = 0; l < grouping.members.size(); ++l) {
    rows_.push_back(ComboRow::from(bx.row(static_cast<Eigen::Index>(l)).transpose()));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(ky_);
    double n = 0.0;
    for (auto i : grouping.members[l]) {
      const double w = weights.empty() ? 1.0 : weights[i];
      if (!(w > 0.0)) throw Error(ErrorKind::non_positive_weight, "weight of observation " + std::to_string(i));
      if (!basis.domain()->contains(ys[i]))
        throw Error(ErrorKind::observation_outside_domain, "observation " + std::to_string(i) + " outside the domain");
      s += w * basis.evaluate(ys[i]);
      n += w;
    }
    stats_.push_back(std::move(s));
    totals_.push_back(n);
  }
  const auto& dom = *basis.domain();
  auto stacked = std::make_shared<Eigen::MatrixXd>(basis.grid_values().rows() + basis.atom_values().rows(), ky_);
  *stacked << basis.grid_values(), basis.atom_values();
  nodes_.shared = stacked;
  nodes_.replacement.resize(0, ky_);
  node_weights_.resize(stacked->rows());
  node_weights_ << dom.node_weights(), dom.atom_weights();
}

Evaluation BayesObjective::evaluate(const Eigen::VectorXd& params, bool derivatives) const {
  check_length(params, dimension());
  const Eigen::Index K = dimension();
  Evaluation ev;
  if (derivatives) {
    ev.gradient = Eigen::VectorXd::Zero(K);
    ev.fisher.leading = Eigen::MatrixXd::Zero(K, K);
    ev.fisher.coupling.resize(K, 0);
  }
  Eigen::VectorXd gb;
  Eigen::MatrixXd fb;
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    const Eigen::VectorXd beta = combo_beta(rows_[l], params, ky_);
    softmax_term(nodes_, node_weights_, stats_[l], totals_[l], beta, ev.loglik, derivatives ? &gb : nullptr,
                 derivatives ? &fb : nullptr);
    scatter(rows_[l], ky_, gb, fb, ev.gradient, ev.fisher.leading, derivatives);
  }
  add_penalty(params, ev, derivatives);
  return ev;
}

MultinomialObjective::MultinomialObjective(const Model& model, const BinnedDesign& design, Eigen::MatrixXd penalty)
    : Objective(std::move(penalty)), kx_(model.covariate_size()), ky_(model.response_size()) {
  if (theta_dimension() != model.coefficient_size()) throw Error(ErrorKind::invalid_argument, "penalty size differs from K");
  require_same_domain(*model.domain(), *design.domain);
  const Eigen::MatrixXd bx = model.design(design.combos);
  cells_ = cell_rows(model.response(), design);
  for (std::size_t l = 0; l < design.combo_count(); ++l) {
    rows_.push_back(ComboRow::from(bx.row(static_cast<Eigen::Index>(l)).transpose()));
    const auto& cells = design.cells[l].cells;
    Eigen::VectorXd widths(static_cast<Eigen::Index>(cells.size())), counts(widths.size());
    for (std::size_t g = 0; g < cells.size(); ++g) {
      widths(static_cast<Eigen::Index>(g)) = cells[g].width;
      counts(static_cast<Eigen::Index>(g)) = cells[g].count * cells[g].weight;
    }
    if (!(counts.sum() > 0.0))
      throw Error(ErrorKind::empty_combo, "combo " + std::to_string(l) + " has no observations");
    stats_.push_back(cells_[l].transpose_times(counts));
    totals_.push_back(counts.sum());
    widths_.push_back(std::move(widths));
  }
}

Evaluation MultinomialObjective::evaluate(const Eigen::VectorXd& params, bool derivatives) const {
  check_length(params, dimension());
  const Eigen::Index K = dimension();
  Evaluation ev;
  if (derivatives) {
    ev.gradient = Eigen::VectorXd::Zero(K);
    ev.fisher.leading = Eigen::MatrixXd::Zero(K, K);
    ev.fisher.coupling.resize(K, 0);
  }
  Eigen::VectorXd gb;
  Eigen::MatrixXd fb;
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    const Eigen::VectorXd beta = combo_beta(rows_[l], params, ky_);
    softmax_term(cells_[l], widths_[l], stats_[l], totals_[l], beta, ev.loglik, derivatives ? &gb : nullptr,
                 derivatives ? &fb : nullptr);
    scatter(rows_[l], ky_, gb, fb, ev.gradient, ev.fisher.leading, derivatives);
  }
  add_penalty(params, ev, derivatives);
  return ev;
}

PoissonObjective::PoissonObjective(const Model& model, const BinnedDesign& design, Eigen::MatrixXd penalty,
                                   InterceptMode mode)
    : Objective(std::move(penalty)), mode_(mode), kx_(model.covariate_size()), ky_(model.response_size()) {
  if (theta_dimension() != model.coefficient_size()) throw Error(ErrorKind::invalid_argument, "penalty size differs from K");
  require_same_domain(*model.domain(), *design.domain);
  total_mass_ = design.domain->total_mass();
  const Eigen::MatrixXd bx = model.design(design.combos);
  cells_ = cell_rows(model.response(), design);
  nuisance_ = mode_ == InterceptMode::per_combo ? static_cast<Eigen::Index>(design.combo_count()) : kx_;
  for (std::size_t l = 0; l < design.combo_count(); ++l) {
    rows_.push_back(ComboRow::from(bx.row(static_cast<Eigen::Index>(l)).transpose()));
    const auto& cells = design.cells[l].cells;
    const auto G = static_cast<Eigen::Index>(cells.size());
    Eigen::VectorXd n(G), v(G), o(G);
    for (Eigen::Index g = 0; g < G; ++g) {
      const auto& c = cells[static_cast<std::size_t>(g)];
      n(g) = c.count;
      v(g) = c.weight;
      o(g) = c.offset;
    }
    if (!(n.sum() > 0.0)) throw Error(ErrorKind::empty_combo, "combo " + std::to_string(l) + " has no observations");
    counts_.push_back(std::move(n));
    weights_.push_back(std::move(v));
    offsets_.push_back(std::move(o));
  }
}

Eigen::VectorXd PoissonObjective::initial_point() const {
  const Eigen::Index K = theta_dimension();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimension());
  const auto L = static_cast<Eigen::Index>(rows_.size());
  Eigen::VectorXd start(L);
  for (Eigen::Index l = 0; l < L; ++l)
    start(l) = std::log(counts_[static_cast<std::size_t>(l)].dot(weights_[static_cast<std::size_t>(l)]) / total_mass_);
  if (mode_ == InterceptMode::per_combo) {
    x.tail(L) = start;
  } else {
    Eigen::MatrixXd B(L, kx_);
    for (Eigen::Index l = 0; l < L; ++l) B.row(l) = rows_[static_cast<std::size_t>(l)].values.transpose();
    x.tail(kx_) = B.colPivHouseholderQr().solve(start);
  }
  (void)K;
  return x;
}

Evaluation PoissonObjective::evaluate(const Eigen::VectorXd& params, bool derivatives) const {
  check_length(params, dimension());
  const Eigen::Index K = theta_dimension();
  const bool smooth = mode_ == InterceptMode::smooth;
  const Eigen::Index lead = smooth ? K + kx_ : K;
  Evaluation ev;
  if (derivatives) {
    ev.gradient = Eigen::VectorXd::Zero(dimension());
    ev.fisher.leading = Eigen::MatrixXd::Zero(lead, lead);
    ev.fisher.coupling = Eigen::MatrixXd::Zero(lead, smooth ? 0 : nuisance_);
    ev.fisher.tail = Eigen::VectorXd::Zero(smooth ? 0 : nuisance_);
  }
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    const ComboRow& b = rows_[l];
    const Eigen::VectorXd beta = combo_beta(b, params, ky_);
    double tau = 0.0;
    if (smooth) {
      for (auto n : b.nonzero) tau += b.values(n) * params(K + n);
    } else {
      tau = params(K + static_cast<Eigen::Index>(l));
    }
    const Eigen::VectorXd eta = (offsets_[l] + cells_[l].times(beta)).array() + tau;
    const Eigen::VectorXd lambda = eta.array().exp();
    const Eigen::VectorXd& n = counts_[l];
    const Eigen::VectorXd& v = weights_[l];
    ev.loglik += v.dot(n.cwiseProduct(eta) - lambda);
    if (!derivatives) continue;
    const Eigen::VectorXd r = v.cwiseProduct(n - lambda);
    const Eigen::VectorXd w = v.cwiseProduct(lambda);
    const Eigen::VectorXd gb = cells_[l].transpose_times(r);
    const Eigen::MatrixXd fb = cells_[l].weighted_gram(w);
    const Eigen::VectorXd fbt = cells_[l].transpose_times(w);
    const double gt = r.sum(), ftt = w.sum();
    scatter(b, ky_, gb, fb, ev.gradient, ev.fisher.leading, true);
    if (smooth) {
      for (auto n1 : b.nonzero) {
        ev.gradient(K + n1) += b.values(n1) * gt;
        for (auto n2 : b.nonzero) {
          const double bb = b.values(n1) * b.values(n2);
          ev.fisher.leading(K + n1, K + n2) += bb * ftt;
          ev.fisher.leading.block(n1 * ky_, K + n2, ky_, 1) += bb * fbt;
          ev.fisher.leading.block(K + n2, n1 * ky_, 1, ky_) += bb * fbt.transpose();
        }
      }
    } else {
      const auto li = static_cast<Eigen::Index>(l);
      ev.gradient(K + li) += gt;
      ev.fisher.tail(li) += ftt;
      for (auto n1 : b.nonzero) ev.fisher.coupling.block(n1 * ky_, li, ky_, 1) += b.values(n1) * fbt;
    }
  }
  add_penalty(params, ev, derivatives);
  return ev;
}

}  // namespace densreg
