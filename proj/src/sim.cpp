#include "densreg/sim.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "densreg/error.hpp"
#include "densreg/inference.hpp"

namespace densreg {

std::vector<double> cell_representatives(const PartitionPtr& partition, const MixedDomain& domain) {
  std::vector<double> out;
  if (partition)
    for (std::size_t g = 0; g < partition->size(); ++g) out.push_back(partition->midpoint(g));
  for (const auto& a : domain.atoms()) out.push_back(a.location);
  return out;
}

Eigen::VectorXd cell_probabilities(const ResponseBasis& basis, const Eigen::VectorXd& coefficients,
                                   const PartitionPtr& partition) {
  const auto& dom = *basis.domain();
  if (dom.has_interval() && !partition) throw Error(ErrorKind::invalid_argument, "continuous domain needs bins");
  const std::size_t G = partition ? partition->size() : 0;
  const std::size_t D = dom.atom_count();
  const Eigen::VectorXd atom_clr = basis.atom_values() * coefficients;
  double shift = atom_clr.size() ? atom_clr.maxCoeff() : -std::numeric_limits<double>::infinity();
  if (dom.has_interval()) shift = std::max(shift, (basis.grid_values() * coefficients).maxCoeff());

  Eigen::VectorXd mass(static_cast<Eigen::Index>(G + D));
  if (G > 0) {
    // integrate piecewise between bin cuts and spline knots, where the integrand is smooth
    std::vector<double> breaks = partition->cuts();
    for (double k : basis.knots())
      if (k > breaks.front() && k < breaks.back()) breaks.push_back(k);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    auto f = [&](double y) {
      // interior continuous points only, so atoms at the ends never shadow the density
      Eigen::VectorXd b = basis.evaluate(y);
      if (dom.atom_at(y)) b = basis.evaluate(std::nextafter(y, 0.5 * (breaks.front() + breaks.back())));
      return std::exp(b.dot(coefficients) - shift);
    };
    mass.head(static_cast<Eigen::Index>(G)).setZero();
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      const double lo = breaks[s], hi = breaks[s + 1];
      const std::size_t g = *partition->locate(0.5 * (lo + hi));
      mass(static_cast<Eigen::Index>(g)) += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
    }
  }
  for (std::size_t d = 0; d < D; ++d)
    mass(static_cast<Eigen::Index>(G + d)) = dom.atoms()[d].weight * std::exp(atom_clr(static_cast<Eigen::Index>(d)) - shift);
  return mass / mass.sum();
}

namespace {

std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) c[static_cast<std::size_t>(i)] = (s += p(i));
  return c;
}

}  // namespace

std::vector<double> sample_binned(const ResponseBasis& basis, const Eigen::VectorXd& coefficients, std::size_t n,
                                  const PartitionPtr& partition, std::uint64_t seed) {
  const auto reps = cell_representatives(partition, *basis.domain());
  const auto cdf = cumulative(cell_probabilities(basis, coefficients, partition));
  CounterRng rng(seed, 0);
  std::vector<double> out(n);
  for (auto& y : out) y = reps[rng.categorical(cdf)];
  return out;
}

double rel_mse(const std::vector<BayesDensity>& estimates, const std::vector<BayesDensity>& truths) {
  if (estimates.size() != truths.size()) throw Error(ErrorKind::invalid_argument, "estimate and truth counts differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const BayesDensity diff = difference(truths[i], estimates[i]);
    num += inner_product(diff, diff);
    den += inner_product(truths[i], truths[i]);
  }
  if (!(den > 0.0)) throw Error(ErrorKind::zero_truth_norm, "truth has zero norm");
  return num / den;
}

double rel_mse(const Eigen::MatrixXd& gram, const std::vector<Eigen::VectorXd>& estimates,
               const std::vector<Eigen::VectorXd>& truths) {
  if (estimates.size() != truths.size()) throw Error(ErrorKind::invalid_argument, "estimate and truth counts differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const Eigen::VectorXd d = truths[i] - estimates[i];
    num += d.dot(gram * d);
    den += truths[i].dot(gram * truths[i]);
  }
  if (!(den > 0.0)) throw Error(ErrorKind::zero_truth_norm, "truth has zero norm");
  return num / den;
}

double EffectCoverage::simultaneous_rate() const {
  return simultaneous_total ? static_cast<double>(simultaneous_covered) / static_cast<double>(simultaneous_total)
                            : std::numeric_limits<double>::quiet_NaN();
}

double EffectCoverage::pointwise_rate() const {
  return pointwise_total ? static_cast<double>(pointwise_covered) / static_cast<double>(pointwise_total)
                         : std::numeric_limits<double>::quiet_NaN();
}

double EffectCoverage::median_relmse() const {
  std::vector<double> v;
  for (double x : relmse)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const EffectCoverage& CoverageReport::find(const std::string& name, int bins) const {
  for (const auto& e : effects)
    if (e.name == name && e.bins == bins) return e;
  throw Error(ErrorKind::missing_term, "no coverage entry for '" + name + "'");
}

Model scenario_model(const SimScenario& scenario) {
  Model model = Model::compile(scenario.spec, scenario.combos);
  if (scenario.theta.size() != model.coefficient_size())
    throw Error(ErrorKind::config, "truth has " + std::to_string(scenario.theta.size()) + " coefficients, model has " +
                                       std::to_string(model.coefficient_size()));
  return model;
}

namespace {

struct Population {
  PartitionPtr finest;
  std::vector<double> representatives;
  std::vector<std::vector<double>> cdfs;
};

int finest_bins(const SimScenario& s) {
  if (s.bins.empty()) throw Error(ErrorKind::config, "scenario needs at least one bin count");
  const int finest = *std::max_element(s.bins.begin(), s.bins.end());
  for (int g : s.bins)
    if (g < 1 || finest % g != 0) throw Error(ErrorKind::config, "bin counts must divide the largest bin count");
  return finest;
}

Population make_population(const SimScenario& s, const Model& model) {
  Population p;
  const auto& dom = *model.domain();
  if (dom.has_interval()) p.finest = Partition::equidistant(dom.interval().lower, dom.interval().upper, finest_bins(s));
  p.representatives = cell_representatives(p.finest, dom);
  const Eigen::MatrixXd bx = model.design(s.combos);
  const Eigen::Index ky = model.response_size();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Theta(
      s.theta.data(), model.covariate_size(), ky);
  for (Eigen::Index l = 0; l < bx.rows(); ++l) {
    const Eigen::VectorXd beta = Theta.transpose() * bx.row(l).transpose();
    p.cdfs.push_back(cumulative(cell_probabilities(model.response(), beta, p.finest)));
  }
  return p;
}

Observations draw(const SimScenario& s, const Population& pop, std::size_t replication,
                  std::vector<std::size_t>& rows) {
  CounterRng rng(s.seed, replication);
  const std::size_t L = s.combos.rows();
  rows.assign(s.observations, 0);
  Observations obs;
  obs.response.resize(s.observations);
  for (std::size_t i = 0; i < s.observations; ++i) {
    rows[i] = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(L)), L - 1);
    obs.response[i] = pop.representatives[rng.categorical(pop.cdfs[rows[i]])];
  }
  obs.covariates = s.combos.select_rows(rows);
  return obs;
}

}  // namespace

Observations draw_replication(const SimScenario& scenario, const Model& model, std::size_t replication) {
  std::vector<std::size_t> rows;
  return draw(scenario, make_population(scenario, model), replication, rows);
}

CoverageReport coverage_experiment(const SimScenario& s) {
  if (s.observations == 0 || s.replications == 0) throw Error(ErrorKind::config, "scenario needs observations and replications");
  const Model model = scenario_model(s);
  const Population pop = make_population(s, model);
  const std::size_t J = model.terms().size(), L = s.combos.rows();
  const Smoothing smoothing = s.smoothing.empty() ? model.default_smoothing() : s.smoothing;
  const Eigen::MatrixXd& gram = model.response().gram();

  // effect maps per (effect, population combo); effect J is the full prediction
  std::vector<std::vector<Eigen::MatrixXd>> maps(J + 1);
  std::vector<std::size_t> all(J);
  for (std::size_t j = 0; j < J; ++j) all[j] = j;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < J; ++j) maps[j].push_back(effect_matrix(model, sum_of_terms({j}, s.combos, l)));
    maps[J].push_back(effect_matrix(model, sum_of_terms(all, s.combos, l)));
  }
  std::vector<Eigen::MatrixXd> selectors;
  for (std::size_t j = 0; j < J; ++j) selectors.push_back(selection_matrix(model, j));

  CoverageReport report;
  std::vector<int> bins = s.bins;
  std::sort(bins.begin(), bins.end());
  for (int G : bins)
    for (std::size_t j = 0; j <= J; ++j) {
      EffectCoverage e;
      e.name = j < J ? model.terms()[j].label() : "prediction";
      e.bins = G;
      report.effects.push_back(std::move(e));
    }

  const auto& dom = model.domain();
  for (std::size_t r = 0; r < s.replications; ++r) {
    std::vector<std::size_t> rows;
    const Observations obs = draw(s, pop, r, rows);
    std::vector<double> weight(L, 0.0);
    for (auto l : rows) weight[l] += 1.0;
    for (std::size_t gi = 0; gi < bins.size(); ++gi) {
      const int G = bins[gi];
      PartitionPtr partition;
      if (dom->has_interval()) partition = Partition::equidistant(dom->interval().lower, dom->interval().upper, G);
      FitResult fit;
      try {
        const BinnedDesign design = bin_observations(dom, obs.covariates, obs.response, partition);
        fit = fit_binned(model, design, smoothing, s.fit);
        if (!fit.converged) throw Error(ErrorKind::max_iterations_exceeded, "fit did not converge");
      } catch (const Error&) {
        ++report.failures;
        continue;
      }
      for (std::size_t j = 0; j <= J; ++j) {
        EffectCoverage& e = report.effects[gi * (J + 1) + j];
        double num = 0.0, den = 0.0;
        std::size_t covered = 0, total = 0;
        for (std::size_t l = 0; l < L; ++l) {
          const Eigen::MatrixXd& A = maps[j][l];
          const Eigen::VectorXd truth = A * s.theta, est = A * fit.theta;
          const Eigen::VectorXd d = truth - est;
          num += weight[l] * d.dot(gram * d);
          den += weight[l] * truth.dot(gram * truth);
          if (A.isZero(0.0)) continue;
          const EffectRegion region = make_region(est, A * fit.covariance * A.transpose(), s.level);
          ++total;
          if (region.contains(truth)) ++covered;
        }
        const double rm = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
        e.relmse.push_back(rm);
        e.pointwise_covered += covered;
        e.pointwise_total += total;
        report.records.push_back({r, G, e.name, rm, "pointwise", covered, total});
        if (j < J) {
          const Eigen::MatrixXd& S = selectors[j];
          const EffectRegion region = make_region(S * fit.theta, S * fit.covariance * S.transpose(), s.level);
          const bool hit = region.contains(S * s.theta);
          e.simultaneous_covered += hit ? 1 : 0;
          ++e.simultaneous_total;
          report.records.push_back({r, G, e.name, rm, "simultaneous", hit ? 1u : 0u, 1});
        }
      }
    }
  }
  return report;
}

}  // namespace densreg
