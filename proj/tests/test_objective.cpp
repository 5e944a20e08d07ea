#include <cmath>

#include "densreg/error.hpp"
#include "densreg/fit.hpp"
#include "densreg/objective.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace densreg;

namespace {

struct Setup {
  Observations data;
  Model model;
  BinnedDesign design;
};

Setup setup(std::uint64_t seed, std::size_t n, int bins = 30, int quadrature = 401) {
  auto data = fixture::mixed_data(seed, n);
  Model model = Model::compile(fixture::mixed_model_spec(5, quadrature), data.covariates);
  BinnedDesign design = bin_for_model(model, data, bins);
  return {std::move(data), std::move(model), std::move(design)};
}

void check_derivatives(const Objective& obj, const Eigen::VectorXd& x) {
  const Evaluation ev = obj.evaluate(x);
  auto value = [&](const Eigen::VectorXd& p) { return obj.evaluate(p, false).value; };
  auto grad = [&](const Eigen::VectorXd& p) { return obj.evaluate(p).gradient; };
  CHECK(oracle::relative_error(ev.gradient, oracle::gradient(value, x, 1e-5)) < 1e-5);
  const Eigen::MatrixXd hess = -ev.fisher.dense();
  CHECK(oracle::relative_error(hess, oracle::jacobian(grad, x, 1e-5)) < 1e-4);
  CHECK(obj.evaluate(x, false).value == doctest::Approx(ev.value).epsilon(1e-14));
}

}  // namespace

TEST_CASE("block symmetric solves") {
  CounterRng rng(8, 0);
  const Eigen::Index m = 5, t = 4;
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(m + t + 3, m + t);
  Eigen::MatrixXd F = X.transpose() * X;
  F.bottomRightCorner(t, t) = F.bottomRightCorner(t, t).diagonal().asDiagonal();
  F += Eigen::MatrixXd::Identity(m + t, m + t) * 5.0;
  BlockSymmetric B{F.topLeftCorner(m, m), F.topRightCorner(m, t), F.bottomRightCorner(t, t).diagonal()};
  CHECK((B.dense() - F).norm() == 0.0);
  const Eigen::VectorXd rhs = fixture::random_vector(rng, m + t, 1.0);
  CHECK((solve_positive(B, rhs) - F.llt().solve(rhs)).norm() < 1e-12);
  const Eigen::MatrixXd inv = F.inverse();
  CHECK((inverse_leading(B, 3) - inv.topLeftCorner(3, 3)).norm() < 1e-12);
  BlockSymmetric bad = B;
  bad.tail(1) = -1.0;
  CHECK_THROWS_AS(solve_positive(bad, rhs), Error);
}

TEST_CASE("direct objective at zero") {
  auto s = setup(1, 150);
  BayesObjective obj(s.model, s.data.covariates, s.data.response, {},
                     Eigen::MatrixXd::Zero(s.model.coefficient_size(), s.model.coefficient_size()));
  const Evaluation ev = obj.evaluate(Eigen::VectorXd::Zero(obj.dimension()));
  CHECK(ev.value == doctest::Approx(-150.0 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("penalty convention") {
  auto s = setup(2, 150);
  CounterRng rng(2, 1);
  const Eigen::VectorXd theta = fixture::random_vector(rng, s.model.coefficient_size(), 0.3);
  const Eigen::MatrixXd P = s.model.penalty(fixture::smoothing(s.model, 1.5, 0.7));
  MultinomialObjective plain(s.model, s.design, Eigen::MatrixXd::Zero(P.rows(), P.cols()));
  MultinomialObjective pen(s.model, s.design, P);
  const double a = plain.evaluate(theta).value, b = pen.evaluate(theta).value;
  CHECK(b == doctest::Approx(a - theta.dot(P * theta)).epsilon(1e-12));
  CHECK(pen.evaluate(theta).loglik == doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("analytic derivatives match finite differences") {
  for (std::uint64_t seed : {3u, 4u}) {
    auto s = setup(seed, 200);
    CounterRng rng(seed, 9);
    const Eigen::MatrixXd P = s.model.penalty(fixture::smoothing(s.model, 0.8, 0.2));
    const Eigen::VectorXd theta = fixture::random_vector(rng, s.model.coefficient_size(), 0.3);
    check_derivatives(BayesObjective(s.model, s.data.covariates, s.data.response, {}, P), theta);
    check_derivatives(MultinomialObjective(s.model, s.design, P), theta);
    PoissonObjective po(s.model, s.design, P);
    Eigen::VectorXd x = po.initial_point();
    x.head(theta.size()) = theta;
    x.tail(x.size() - theta.size()) += fixture::random_vector(rng, x.size() - theta.size(), 0.2);
    check_derivatives(po, x);
    PoissonObjective smooth(s.model, s.design, P, InterceptMode::smooth);
    Eigen::VectorXd xs = smooth.initial_point();
    xs.head(theta.size()) = theta;
    check_derivatives(smooth, xs);
  }
}

TEST_CASE("discrete-only multinomial equals the direct objective") {
  CounterRng rng(5, 0);
  ModelSpec spec;
  spec.interval.reset();
  spec.atoms = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 0.5}, {3.0, 1.0}};
  spec.terms = {fixture::intercept(), fixture::categorical("g")};
  Observations data;
  std::vector<std::string> g;
  for (int i = 0; i < 120; ++i) {
    g.push_back(i % 3 == 0 ? "p" : "q");
    data.response.push_back(std::floor(rng.uniform() * 4.0));
  }
  data.covariates.add_categorical("g", g);
  const Model model = Model::compile(spec, data.covariates);
  const BinnedDesign design = bin_for_model(model, data, 1);
  const Eigen::MatrixXd P = model.penalty(fixture::smoothing(model, 0.0, 0.3));
  BayesObjective direct(model, data.covariates, data.response, {}, P);
  MultinomialObjective mn(model, design, P);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd theta = fixture::random_vector(rng, model.coefficient_size(), 2.0);
    CHECK(std::abs(direct.evaluate(theta).value - mn.evaluate(theta).value) < 1e-12);
  }
}

TEST_CASE("weights and offsets match weighted counts") {
  auto s = setup(6, 200);
  CounterRng rng(6, 3);
  std::vector<double> w(s.data.response.size());
  for (auto& x : w) x = 0.2 + 2.0 * rng.uniform();
  s.data.weights = w;
  const BinnedDesign weighted = bin_for_model(s.model, s.data, 30);
  const BinnedDesign counts = to_weighted_counts(weighted);
  const Eigen::MatrixXd P = s.model.penalty(fixture::smoothing(s.model, 0.5, 0.0));
  PoissonObjective a(s.model, weighted, P), b(s.model, counts, P);
  Eigen::VectorXd x = a.initial_point();
  x.head(s.model.coefficient_size()) = fixture::random_vector(rng, s.model.coefficient_size(), 0.3);
  const Evaluation ea = a.evaluate(x), eb = b.evaluate(x);
  CHECK((ea.gradient - eb.gradient).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((ea.fisher.dense() - eb.fisher.dense()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("empty combos are rejected") {
  auto s = setup(7, 100);
  std::vector<std::vector<std::size_t>> parts(2);
  for (std::size_t i = 0; i < s.design.members[0].size(); ++i) parts[0].push_back(i);
  const BinnedDesign split = split_partition(s.design, 0, parts);
  const Eigen::MatrixXd P = Eigen::MatrixXd::Zero(s.model.coefficient_size(), s.model.coefficient_size());
  try {
    MultinomialObjective mn(s.model, split, P);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_combo);
  }
}
