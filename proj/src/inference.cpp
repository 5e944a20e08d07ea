#include "densreg/inference.hpp"

#include <cmath>
#include <limits>

#include "densreg/error.hpp"
#include "densreg/random.hpp"

namespace densreg {

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  const double eps = 1e-16;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  // continued fraction for Q(a, x), modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorKind::invalid_argument, "degrees of freedom must be positive");
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::invalid_argument, "quantile level must be in (0, 1)");
  double lo = 0.0, hi = std::max(1.0, dof);
  while (chi2_cdf(hi, dof) < p) {
    lo = hi;
    hi *= 2.0;
  }
  // bisection polished by Newton steps that stay inside the bracket
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double f = chi2_cdf(x, dof) - p;
    if (f == 0.0) return x;
    (f < 0.0 ? lo : hi) = x;
    const double k = 0.5 * dof;
    const double density = std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
    double next = density > 0.0 ? x - f / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-13) return next;
    x = next;
  }
  return x;
}

EffectQuery sum_of_terms(const std::vector<std::size_t>& terms, const CovariateTable& x, std::size_t row) {
  EffectQuery q;
  const CovariateTable one = x.row(row);
  for (auto j : terms) q.push_back({j, one, 1.0});
  return q;
}

Eigen::MatrixXd effect_matrix(const Model& model, const EffectQuery& query) {
  const Eigen::Index ky = model.response_size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ky, model.coefficient_size());
  for (const auto& st : query) {
    if (st.term >= model.terms().size()) throw Error(ErrorKind::missing_term, "term index out of range");
    if (st.x.rows() != 1) throw Error(ErrorKind::invalid_argument, "effect queries take a single covariate row");
    const Eigen::VectorXd b = model.terms()[st.term].evaluate(st.x).row(0).transpose();
    const Eigen::Index off = model.term_offset(st.term);
    for (Eigen::Index n = 0; n < b.size(); ++n)
      if (b(n) != 0.0) A.block(0, (off + n) * ky, ky, ky).diagonal().array() += st.sign * b(n);
  }
  return A;
}

Eigen::MatrixXd selection_matrix(const Model& model, std::size_t term) {
  if (term >= model.terms().size()) throw Error(ErrorKind::missing_term, "term index out of range");
  const Eigen::Index ky = model.response_size();
  const Eigen::Index kj = model.terms()[term].size() * ky;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(kj, model.coefficient_size());
  S.block(0, model.term_offset(term) * ky, kj, kj).setIdentity();
  return S;
}

double EffectRegion::statistic(const Eigen::VectorXd& point) const {
  const Eigen::VectorXd d = point - center;
  return d.dot(precision * d);
}

EffectRegion make_region(Eigen::VectorXd center, Eigen::MatrixXd covariance, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::invalid_argument, "coverage level must be in (0, 1)");
  EffectRegion r;
  r.center = std::move(center);
  r.level = level;
  const Eigen::Index d = r.center.size();
  if (d == 0 || covariance.rows() != d) throw Error(ErrorKind::invalid_argument, "region dimension mismatch");
  const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  const double trace = sym.trace();
  if (!(trace > 0.0)) throw Error(ErrorKind::singular_covariance, "effect covariance is zero");
  if (ev.minCoeff() < -1e-8 * ev.maxCoeff())
    throw Error(ErrorKind::singular_covariance, "effect covariance is not positive semidefinite");
  const double floor = 1e-12 * trace / static_cast<double>(d);
  for (Eigen::Index i = 0; i < d; ++i)
    if (ev(i) < floor) {
      ev(i) = floor;
      r.floored = true;
    }
  const Eigen::MatrixXd& U = es.eigenvectors();
  r.covariance = U * ev.asDiagonal() * U.transpose();
  r.precision = U * ev.cwiseInverse().asDiagonal() * U.transpose();
  r.root = U * ev.cwiseSqrt().asDiagonal() * U.transpose();
  r.radius = chi2_quantile(level, static_cast<double>(d));
  return r;
}

EffectRegion effect_region(const Model& model, const FitResult& fit, const EffectQuery& query, double level) {
  const Eigen::MatrixXd A = effect_matrix(model, query);
  return make_region(A * fit.theta, A * fit.covariance * A.transpose(), level);
}

EffectRegion simultaneous_region(const Model& model, const FitResult& fit, std::size_t term, double level) {
  const Eigen::MatrixXd S = selection_matrix(model, term);
  return make_region(S * fit.theta, S * fit.covariance * S.transpose(), level);
}

double p_value(double statistic, Eigen::Index dimension) {
  return 1.0 - chi2_cdf(statistic, static_cast<double>(dimension));
}

double p_value(const EffectRegion& region) {
  return p_value(region.statistic(Eigen::VectorXd::Zero(region.dimension())), region.dimension());
}

std::vector<Eigen::VectorXd> sample_region(const EffectRegion& region, std::size_t count, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const Eigen::Index d = region.dimension();
  const double scale = std::sqrt(region.radius);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd z(d);
  for (std::size_t s = 0; s < count; ++s) {
    double nz = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
      nz = z.norm();
    } while (nz == 0.0);
    const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    out.push_back(region.center + region.root * (z * (scale * r / nz)));
  }
  return out;
}

}  // namespace densreg
