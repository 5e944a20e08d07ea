// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "densreg/bayes_space.hpp"
#include "densreg/fit.hpp"
#include "densreg/inference.hpp"
#include "densreg/interpret.hpp"
#include "densreg/objective.hpp"
#include "densreg/sim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace densreg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0.0 && secs > time_limit) {
    o.pass = false;
    o.detail += " [over time limit " + std::to_string(time_limit) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

struct Instance {
  Observations data;
  Model model;
  BinnedDesign design;
};

Instance instance(std::uint64_t seed, std::size_t n, int continuous_functions, int bins, int quadrature) {
  auto data = fixture::mixed_data(seed, n);
  Model model = Model::compile(fixture::mixed_model_spec(continuous_functions, quadrature), data.covariates);
  BinnedDesign design = bin_for_model(model, data, bins);
  return {std::move(data), std::move(model), std::move(design)};
}

// 1
Outcome poisson_multinomial() {
  double worst_theta = 0.0, worst_cov = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 101; seed < 106; ++seed) {
    const Instance s = instance(seed, 500, 6 + static_cast<int>(seed % 3), 40, 401);
    if (s.model.response_size() > 10) return {false, "instance exceeds K_Y = 10"};
    for (double xi : {0.0, 1.0}) {
      const Smoothing sm = fixture::smoothing(s.model, xi, 0.1 * xi);
      FitOptions mn;
      mn.objective = ObjectiveKind::multinomial;
      const FitResult po = fit_binned(s.model, s.design, sm), mf = fit_binned(s.model, s.design, sm, mn);
      if (!po.converged || !mf.converged) return {false, "fit did not converge"};
      worst_theta = std::max(worst_theta, (po.theta - mf.theta).cwiseAbs().maxCoeff());
      worst_cov = std::max(worst_cov, inf_norm(po.covariance - mf.covariance) / inf_norm(mf.covariance));
      ++runs;
    }
  }
  return {worst_theta <= 1e-6 && worst_cov <= 1e-5,
          std::to_string(runs) + " fits, max|dtheta| = " + num(worst_theta) + " (<= 1e-6), cov rel = " +
              num(worst_cov) + " (<= 1e-5)"};
}

// 2
Outcome discrete_exactness() {
  CounterRng rng(202, 0);
  ModelSpec spec;
  spec.interval.reset();
  spec.atoms = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 0.5}, {3.0, 1.0}, {5.0, 1.5}};
  spec.terms = {fixture::intercept(), fixture::categorical("g"), fixture::linear("x")};
  Observations d;
  std::vector<std::string> g;
  std::vector<double> x;
  for (int i = 0; i < 400; ++i) {
    g.push_back(i % 3 == 0 ? "p" : (i % 3 == 1 ? "q" : "r"));
    x.push_back(std::floor(rng.uniform() * 5.0));
    const double u = rng.uniform();
    d.response.push_back(spec.atoms[static_cast<std::size_t>(std::min(4.0, std::floor(u * u * 5.0 + 0.1 * x.back())))].location);
  }
  d.covariates.add_categorical("g", g);
  d.covariates.add_numeric("x", x);
  const Model model = Model::compile(spec, d.covariates);
  const BinnedDesign design = bin_for_model(model, d, 1);
  const Smoothing sm = fixture::smoothing(model, 0.0, 0.2);
  const Eigen::MatrixXd P = model.penalty(sm);
  BayesObjective direct(model, d.covariates, d.response, {}, P);
  MultinomialObjective mn(model, design, P);
  double first = 0.0, spread = 0.0;
  for (int r = 0; r < 100; ++r) {
    const Eigen::VectorXd theta = fixture::random_vector(rng, model.coefficient_size(), 1.5);
    const double diff = mn.evaluate(theta, false).value - direct.evaluate(theta, false).value;
    if (r == 0) first = diff;
    spread = std::max(spread, std::abs(diff - first));
  }
  FitOptions o;
  o.objective = ObjectiveKind::multinomial;
  const FitResult a = fit_binned(model, design, sm, o);
  const FitResult b = fit_direct_bayes(model, d.covariates, d.response, {}, sm);
  const double dtheta = (a.theta - b.theta).cwiseAbs().maxCoeff();
  return {spread <= 1e-12 && dtheta <= 1e-10 && a.converged && b.converged,
          "difference constant to " + num(spread) + " (<= 1e-12) over 100 theta, max|dtheta| = " + num(dtheta) +
              " (<= 1e-10)"};
}

// 3
Outcome binning_convergence() {
  auto data = fixture::mixed_data(303, 1500);
  const Model model = Model::compile(fixture::mixed_model_spec(6, 1001), data.covariates);
  const Smoothing sm = fixture::smoothing(model, 0.5, 0.0);
  const FitResult direct = fit_direct_bayes(model, data.covariates, data.response, {}, sm);
  if (!direct.converged) return {false, "direct fit did not converge"};
  FitOptions o;
  o.objective = ObjectiveKind::multinomial;
  std::vector<double> err;
  std::string detail = "errors";
  for (int G : {25, 50, 100, 200}) {
    const FitResult f = fit_binned(model, bin_for_model(model, data, G), sm, o);
    if (!f.converged) return {false, "binned fit did not converge"};
    err.push_back((f.theta - direct.theta).norm());
    detail += " G=" + std::to_string(G) + ":" + num(err.back());
  }
  const bool decreasing = std::is_sorted(err.rbegin(), err.rend()) && std::adjacent_find(err.begin(), err.end()) == err.end();
  const double ratio = err[3] / err[1];
  return {decreasing && ratio <= 0.25, detail + ", G200/G50 = " + num(ratio) + " (<= 0.25)"};
}

// 4
Outcome derivatives() {
  double grad = 0.0, hess = 0.0;
  int checked = 0;
  auto check = [&](const Objective& obj, const Eigen::VectorXd& x) {
    const Evaluation ev = obj.evaluate(x);
    auto value = [&](const Eigen::VectorXd& p) { return obj.evaluate(p, false).value; };
    auto gradient = [&](const Eigen::VectorXd& p) { return obj.evaluate(p).gradient; };
    grad = std::max(grad, oracle::relative_error(ev.gradient, oracle::gradient(value, x, 1e-5)));
    hess = std::max(hess, oracle::relative_error(-ev.fisher.dense(), oracle::jacobian(gradient, x, 1e-5)));
    ++checked;
  };
  for (std::uint64_t seed = 401; seed < 411; ++seed) {
    const Instance s = instance(seed, 150, 5, 20, 201);
    CounterRng rng(seed, 1);
    const Eigen::MatrixXd P = s.model.penalty(fixture::smoothing(s.model, rng.uniform(), rng.uniform()));
    const Eigen::VectorXd theta = fixture::random_vector(rng, s.model.coefficient_size(), 0.4);
    check(BayesObjective(s.model, s.data.covariates, s.data.response, {}, P), theta);
    check(MultinomialObjective(s.model, s.design, P), theta);
    for (auto mode : {InterceptMode::per_combo, InterceptMode::smooth}) {
      PoissonObjective po(s.model, s.design, P, mode);
      Eigen::VectorXd x = po.initial_point();
      x.head(theta.size()) = theta;
      x.tail(x.size() - theta.size()) += fixture::random_vector(rng, x.size() - theta.size(), 0.2);
      check(po, x);
    }
  }
  return {grad <= 1e-5 && hess <= 1e-4, std::to_string(checked) + " objective instances, score rel err " + num(grad) +
                                            " (<= 1e-5), Hessian rel err " + num(hess) + " (<= 1e-4)"};
}

// 5
Outcome definiteness() {
  double worst = std::numeric_limits<double>::infinity();
  int count = 0;
  for (std::uint64_t seed = 501; seed < 505; ++seed) {
    const Instance s = instance(seed, 300, 5, 20, 201);
    if (!check_model_ranks(s.model, s.design).ok()) return {false, "instance is not full rank"};
    CounterRng rng(seed, 2);
    const Eigen::MatrixXd P = s.model.penalty(fixture::smoothing(s.model, 0.5, 0.1));
    MultinomialObjective mn(s.model, s.design, P);
    PoissonObjective po(s.model, s.design, P);
    BayesObjective by(s.model, s.data.covariates, s.data.response, {}, P);
    for (int r = 0; r < 5; ++r) {
      const Eigen::VectorXd theta = fixture::random_vector(rng, s.model.coefficient_size(), 1.0);
      Eigen::VectorXd x = po.initial_point();
      x.head(theta.size()) = theta;
      x.tail(x.size() - theta.size()) += fixture::random_vector(rng, x.size() - theta.size(), 0.5);
      for (const Eigen::MatrixXd& H : {Eigen::MatrixXd(-mn.evaluate(theta).fisher.dense()),
                                       Eigen::MatrixXd(-po.evaluate(x).fisher.dense()),
                                       Eigen::MatrixXd(-by.evaluate(theta).fisher.dense())}) {
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues();
        worst = std::min(worst, -ev.maxCoeff() / std::max(1.0, -ev.minCoeff()));
      }
      ++count;
    }
  }
  return {worst > 0.0, std::to_string(count) + " random points x 3 objectives, largest eigenvalue / scale = " +
                           num(-worst) + " (< 0)"};
}

// 6
Outcome bayes_space_axioms() {
  const DomainPtr d = make_domain(Interval{0.0, 1.0}, {{0.0, 1.0}, {1.0, 0.5}}, 1001);
  constexpr double eps_int = 1e-8;
  CounterRng rng(606, 0);
  auto random_density = [&] {
    GridFunction g(d, Eigen::VectorXd(d->nodes().size()), Eigen::VectorXd(d->atom_count()));
    const double a = rng.normal(), b = rng.normal(), c = 1.0 + 4.0 * rng.uniform(), e = rng.uniform();
    for (Eigen::Index i = 0; i < g.continuous.size(); ++i) {
      const double y = d->nodes()(i);
      g.continuous(i) = std::exp(a * std::sin(c * y + e) + b * y * y);  // positive density, not normalized
    }
    for (Eigen::Index k = 0; k < g.atoms.size(); ++k) g.atoms(k) = std::exp(rng.normal());
    return g;
  };
  // independent pairwise-log-ratio form of the inner product
  const Eigen::VectorXd w = [&] {
    Eigen::VectorXd v(d->nodes().size() + static_cast<Eigen::Index>(d->atom_count()));
    v << d->node_weights(), d->atom_weights();
    return v;
  }();
  auto logs = [](const GridFunction& f) {
    Eigen::VectorXd v(f.continuous.size() + f.atoms.size());
    v << f.continuous.array().log().matrix(), f.atoms.array().log().matrix();
    return v;
  };
  auto pairwise = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) s += w(i) * w(j) * (a(i) - a(j)) * (b(i) - b(j));
    return s / d->total_mass();  // each unordered pair once
  };
  double iso = 0.0, axioms = 0.0, centering = 0.0;
  auto gap = [](const GridFunction& p, const GridFunction& q) {
    return std::max((p.continuous - q.continuous).cwiseAbs().maxCoeff(), (p.atoms - q.atoms).cwiseAbs().maxCoeff());
  };
  for (int r = 0; r < 100; ++r) {
    const GridFunction rf = random_density(), rg = random_density();
    const BayesDensity f = BayesDensity::from_density(rf), g = BayesDensity::from_density(rg);
    const Eigen::VectorXd lf = logs(rf), lg = logs(rg);
    iso = std::max(iso, std::abs(inner_product(f, g) - pairwise(lf, lg)));
    iso = std::max(iso, std::abs(std::pow(norm(difference(f, g)), 2) - pairwise(lf - lg, lf - lg)));
    const double alpha = rng.normal(), beta = rng.normal();
    const BayesDensity h = BayesDensity::from_density(random_density());
    const BayesDensity neutral = inv_clr(GridFunction::constant(d, 0.0));
    axioms = std::max(axioms, gap(perturb(f, g).clr(), perturb(g, f).clr()));
    axioms = std::max(axioms, gap(perturb(perturb(f, g), h).clr(), perturb(f, perturb(g, h)).clr()));
    axioms = std::max(axioms, gap(perturb(f, neutral).clr(), f.clr()));
    axioms = std::max(axioms, gap(perturb(f, power(-1.0, f)).clr(), neutral.clr()));
    axioms = std::max(axioms, gap(power(alpha, perturb(f, g)).clr(), perturb(power(alpha, f), power(alpha, g)).clr()));
    axioms = std::max(axioms, gap(power(alpha + beta, f).clr(), perturb(power(alpha, f), power(beta, f)).clr()));
    axioms = std::max(axioms, gap(power(alpha, power(beta, f)).clr(), power(alpha * beta, f).clr()));
    axioms = std::max(axioms, gap(power(1.0, f).clr(), f.clr()));
    axioms = std::max(axioms, gap(inv_clr(f.clr()).clr(), f.clr()));
    centering = std::max(centering, std::abs(integrate(perturb(f, g).clr())));
  }
  return {iso <= 10.0 * eps_int && axioms <= 1e-12 && centering <= eps_int,
          "100 pairs, isometry err " + num(iso) + " (<= 1e-7), clr-level identities " + num(axioms) +
              " (<= 1e-12), |integral clr| " + num(centering)};
}

/// Least-squares clr coefficients of a target clr function.
Eigen::VectorXd project(const ResponseBasis& basis, const std::function<double(double)>& continuous,
                        const Eigen::VectorXd& atoms) {
  const auto& d = *basis.domain();
  Eigen::VectorXd c(d.nodes().size());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = continuous(d.nodes()(i));
  const Eigen::VectorXd rhs = basis.grid_values().transpose() * d.node_weights().asDiagonal() * c +
                              basis.atom_values().transpose() * d.atom_weights().asDiagonal() * atoms;
  return basis.gram().ldlt().solve(rhs);
}

SimScenario coverage_scenario() {
  SimScenario s;
  s.spec = fixture::mixed_spec(4, 401);
  s.spec.terms = {fixture::intercept(), fixture::categorical("g"), fixture::categorical("h")};
  s.combos.add_categorical("g", {"a", "a", "b", "b", "c", "c"});
  s.combos.add_categorical("h", {"u", "v", "u", "v", "u", "v"});
  const Model m = Model::compile(s.spec, s.combos);
  const ResponseBasis& b = m.response();
  const Eigen::Index ky = m.response_size();
  auto normal = [](double y, double mu, double sd) {
    return std::exp(-0.5 * (y - mu) * (y - mu) / (sd * sd)) / sd;
  };
  // bimodal continuous part plus two atoms
  const Eigen::VectorXd base = project(
      b, [&](double y) { return std::log(0.6 * normal(y, 0.25, 0.08) + 0.4 * normal(y, 0.7, 0.1) + 0.05); },
      Eigen::Vector2d(std::log(0.6), std::log(0.4)));
  const Eigen::VectorXd gb = project(b, [](double y) { return 0.6 * std::sin(2.0 * std::numbers::pi * y); }, Eigen::Vector2d(0.3, -0.2));
  const Eigen::VectorXd gc = project(b, [](double y) { return -0.5 * (y - 0.5); }, Eigen::Vector2d(-0.4, 0.2));
  const Eigen::VectorXd hv = project(b, [](double y) { return 0.4 * std::cos(3.0 * y); }, Eigen::Vector2d(0.2, 0.3));
  s.theta.resize(m.coefficient_size());
  s.theta << base, gb, gc, hv;
  if (s.theta.size() != 4 * ky) throw std::logic_error("unexpected coefficient layout");
  s.observations = 2000;
  s.bins = {50};
  s.replications = 200;
  s.seed = 707;
  s.level = 0.95;
  return s;
}

// 7
Outcome coverage() {
  const SimScenario s = coverage_scenario();
  if (s.combos.rows() != 6 || scenario_model(s).response_size() != 6)
    return {false, "scenario shape: " + std::to_string(s.combos.rows()) + " combos, K_Y = " + std::to_string(scenario_model(s).response_size())};
  const CoverageReport rep = coverage_experiment(s);
  bool ok = rep.failures == 0;
  std::string detail = "R=200, N=2000, K_Y=6:";
  for (const auto& e : rep.effects) {
    const double p = e.pointwise_rate();
    ok = ok && p >= 0.90 && p <= 0.99;
    detail += " " + e.name + " pw " + num(p);
    if (e.simultaneous_total > 0) {
      const double q = e.simultaneous_rate();
      ok = ok && q >= 0.90 && q <= 0.99;
      detail += " sim " + num(q);
    }
  }
  if (rep.failures) detail += ", " + std::to_string(rep.failures) + " failed fits";
  return {ok, detail + " (band [0.90, 0.99])"};
}

// 8
Outcome relmse_trend() {
  SimScenario s = coverage_scenario();
  s.replications = 20;
  s.observations = 1000;
  const CoverageReport small = coverage_experiment(s);
  s.observations = 5000;
  const CoverageReport large = coverage_experiment(s);
  bool ok = small.failures == 0 && large.failures == 0;
  std::string detail = "median relMSE N=1000 -> 5000:";
  for (const auto& e : small.effects) {
    const double a = e.median_relmse(), b = large.find(e.name, e.bins).median_relmse();
    ok = ok && b < a;
    detail += " " + e.name + " " + num(a) + "->" + num(b);
  }
  return {ok, detail};
}

// 9
Outcome weighted_identity() {
  double grad = 0.0, theta = 0.0;
  for (std::uint64_t seed = 901; seed < 906; ++seed) {
    Instance s = instance(seed, 300, 5, 30, 201);
    CounterRng rng(seed, 4);
    s.data.weights.resize(s.data.response.size());
    for (auto& w : s.data.weights) w = 0.1 + 3.0 * rng.uniform();
    const BinnedDesign weighted = bin_for_model(s.model, s.data, 30);
    const BinnedDesign counts = to_weighted_counts(weighted);
    const Smoothing sm = fixture::smoothing(s.model, 0.5, 0.05);
    const Eigen::MatrixXd P = s.model.penalty(sm);
    PoissonObjective a(s.model, weighted, P), b(s.model, counts, P);
    Eigen::VectorXd x = a.initial_point();
    x.head(s.model.coefficient_size()) = fixture::random_vector(rng, s.model.coefficient_size(), 0.5);
    grad = std::max(grad, (a.evaluate(x).gradient - b.evaluate(x).gradient).cwiseAbs().maxCoeff());
    const FitResult fa = fit_binned(s.model, weighted, sm), fb = fit_binned(s.model, counts, sm);
    if (!fa.converged || !fb.converged) return {false, "fit did not converge"};
    theta = std::max(theta, (fa.theta - fb.theta).cwiseAbs().maxCoeff());
  }
  return {grad <= 1e-10 && theta <= 1e-8,
          "5 instances, gradient diff " + num(grad) + " (<= 1e-10), theta diff " + num(theta) + " (<= 1e-8)"};
}

// 10
Outcome splitting() {
  const Instance s = instance(1001, 300, 5, 30, 201);
  BinnedDesign split = s.design;
  for (std::size_t l = s.design.combo_count(); l-- > 0;) {
    std::vector<std::vector<std::size_t>> singles;
    for (std::size_t i = 0; i < s.design.members[l].size(); ++i) singles.push_back({i});
    split = split_partition(split, l, singles);
  }
  const Smoothing sm = fixture::smoothing(s.model, 1.0, 0.1);
  const FitResult a = fit_binned(s.model, s.design, sm), b = fit_binned(s.model, split, sm);
  const double diff = (a.theta - b.theta).cwiseAbs().maxCoeff();
  return {a.converged && b.converged && split.combo_count() == 300 && diff <= 1e-6,
          std::to_string(s.design.combo_count()) + " combos split into " + std::to_string(split.combo_count()) +
              ", max|dtheta| = " + num(diff) + " (<= 1e-6)"};
}

// 11
Outcome interpretation() {
  const DomainPtr d = make_domain(Interval{0.0, 1.0}, {{0.0, 1.0}, {1.0, 1.0}}, 1001);
  GridFunction effect = GridFunction::constant(d, 0.0);
  effect.atoms << -0.09, 0.23;
  const GridFunction reference = GridFunction::constant(d, 0.0);
  const OddsRatio o = odds_ratio(effect, 1.0, 0.0);
  const OddsRatio r0 = odds_ratio(reference, 1.0, 0.0);
  const bool arithmetic = std::abs(o.log_ratio - 0.32) <= 1e-12 && std::abs(o.ratio - 1.38) <= 5e-3 && r0.ratio == 1.0;

  constexpr double eps_int = 1e-8;
  CounterRng rng(1111, 0);
  auto random_clr = [&] {
    GridFunction g(d, Eigen::VectorXd(d->nodes().size()), Eigen::VectorXd(2));
    const double a = rng.normal(), b = rng.normal(), c = 2.0 + 6.0 * rng.uniform();
    for (Eigen::Index i = 0; i < g.continuous.size(); ++i) g.continuous(i) = a * std::sin(c * d->nodes()(i)) + b * d->nodes()(i);
    g.atoms << rng.normal(), rng.normal();
    return inv_clr(g).clr();
  };
  double worst = std::numeric_limits<double>::infinity();
  for (int r = 0; r < 100; ++r) {
    const BayesDensity h0 = inv_clr(random_clr());
    const GridFunction hj = random_clr();
    const MassShiftSets sets = mass_shift_sets(hj, 0.7 * rng.normal());
    const BayesDensity moved = perturb(h0, inv_clr(hj));
    worst = std::min(worst, set_mass(moved, sets, true) - set_mass(h0, sets, true) + eps_int);
    worst = std::min(worst, set_mass(h0, sets, false) - set_mass(moved, sets, false) + eps_int);
  }
  return {arithmetic && worst >= 0.0, "log OR = " + num(o.log_ratio) + ", OR = " + num(o.ratio) +
                                     "; mass shift holds on 100 triples (min margin " + num(worst - eps_int) + ")"};
}

// 12
Outcome chi_square() {
  double q = 0.0, id = 0.0;
  for (int k = 1; k <= 20; ++k) {
    q = std::max(q, std::abs(chi2_quantile(0.95, k) - oracle::chi2_quantile(0.95, k)));
    for (double x : {0.05, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0}) {
      const double p = chi2_cdf(x, k);
      if (p > 1e-12 && p < 1.0 - 1e-12) id = std::max(id, std::abs(chi2_quantile(p, k) - x) / std::max(1.0, x));
    }
  }
  return {q <= 1e-6 && id <= 1e-8,
          "k=1..20 quantile vs quadrature " + num(q) + " (<= 1e-6), quantile(cdf(x)) - x " + num(id) + " (<= 1e-8)"};
}

}  // namespace

int main() {
  criterion(1, "Poisson/multinomial equivalence", 30, poisson_multinomial);
  criterion(2, "discrete-case exactness", 0, discrete_exactness);
  criterion(3, "binning convergence", 60, binning_convergence);
  criterion(4, "gradient and Hessian checks", 0, derivatives);
  criterion(5, "penalized Hessian definiteness", 0, definiteness);
  criterion(6, "clr isometry and Bayes-space axioms", 0, bayes_space_axioms);
  criterion(7, "coverage at desk scale", 600, coverage);
  criterion(8, "relMSE decreases with N", 0, relmse_trend);
  criterion(9, "weighted-likelihood identity", 0, weighted_identity);
  criterion(10, "splitting invariance", 0, splitting);
  criterion(11, "interpretation arithmetic", 0, interpretation);
  criterion(12, "chi-square machinery", 0, chi_square);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
