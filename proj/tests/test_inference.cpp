#include <cmath>

#include "densreg/error.hpp"
#include "densreg/inference.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace densreg;

TEST_CASE("chi-square distribution against quadrature") {
  for (int k : {1, 2, 3, 5, 8, 12, 30}) {
    CHECK(chi2_cdf(0.0, k) == 0.0);
    for (double x : {0.01, 0.3, 1.0, 2.5, 5.0, 10.0, 20.0, 45.0}) {
      CHECK(chi2_cdf(x, k) == doctest::Approx(oracle::chi2_cdf(x, k)).epsilon(1e-10));
      const double p = chi2_cdf(x, k);
      if (p > 1e-6 && p < 1.0 - 1e-6) CHECK(std::abs(chi2_quantile(p, k) - x) <= 1e-8 * std::max(1.0, x));
    }
  }
  CHECK(chi2_cdf(2.0 * std::log(20.0), 2) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(oracle::chi2_quantile(0.95, 1)).epsilon(1e-10));
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.8415).epsilon(1e-4));
}

TEST_CASE("p-values") {
  CHECK(p_value(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(p_value(3.841, 1) == doctest::Approx(1.0 - oracle::chi2_cdf(3.841, 1)).epsilon(1e-9));
  for (int k : {1, 4, 9}) CHECK(std::abs(p_value(chi2_quantile(0.95, k), k) - 0.05) <= 1e-6);
  const EffectRegion zero = make_region(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 0.95);
  CHECK(p_value(zero) == doctest::Approx(1.0));
}

TEST_CASE("regions: radius, containment and conditioning") {
  Eigen::MatrixXd V(2, 2);
  V << 2.0, 0.6, 0.6, 1.0;
  Eigen::VectorXd c(2);
  c << 1.0, -1.0;
  const EffectRegion r = make_region(c, V, 0.9);
  CHECK(r.radius == doctest::Approx(oracle::chi2_quantile(0.9, 2)).epsilon(1e-10));
  CHECK(r.statistic(c) == 0.0);
  CHECK(r.contains(c));
  const Eigen::VectorXd d = Eigen::Vector2d(0.3, 0.2);
  CHECK(r.statistic(c + d) == doctest::Approx(d.dot(V.ldlt().solve(d))).epsilon(1e-12));
  CHECK_FALSE(r.floored);

  Eigen::MatrixXd S(2, 2);
  S << 1.0, 1.0, 1.0, 1.0;
  CHECK(make_region(c, S, 0.95).floored);
  S(1, 1) = 0.5;  // indefinite
  CHECK_THROWS_AS(make_region(c, S, 0.95), Error);
  CHECK_THROWS_AS(make_region(c, Eigen::MatrixXd::Zero(2, 2), 0.95), Error);
}

TEST_CASE("uniform sampling from the solid ellipsoid") {
  Eigen::MatrixXd V(3, 3);
  V << 1.0, 0.2, 0.1, 0.2, 0.5, 0.0, 0.1, 0.0, 0.3;
  const EffectRegion r = make_region(Eigen::Vector3d(1, 2, 3), V, 0.95);
  const auto a = sample_region(r, 2000, 11), b = sample_region(r, 2000, 11);
  double inner = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(r.statistic(a[i]) <= r.radius * (1.0 + 1e-12));
    CHECK(a[i] == b[i]);
    inner += r.statistic(a[i]) <= r.radius * 0.125 ? 1.0 : 0.0;  // half-scale ellipsoid holds 1/8 of the volume
  }
  CHECK(inner / 2000.0 == doctest::Approx(0.125).epsilon(0.25));

  Eigen::MatrixXd v1(1, 1);
  v1 << 4.0;
  const EffectRegion line = make_region(Eigen::VectorXd::Constant(1, 0.5), v1, 0.95);
  const double half = std::sqrt(line.radius * 4.0);
  std::vector<double> xs;
  for (const auto& s : sample_region(line, 10000, 3)) xs.push_back(s(0));
  CHECK(oracle::ks_uniform(xs, 0.5 - half, 0.5 + half) < 0.02);
}

TEST_CASE("effect and simultaneous regions from a fit") {
  auto data = fixture::mixed_data(21, 400);
  const Model model = Model::compile(fixture::mixed_model_spec(5, 401), data.covariates);
  const BinnedDesign design = bin_for_model(model, data, 40);
  const FitResult fit = fit_binned(model, design, fixture::smoothing(model, 1.0, 0.0));
  const Eigen::Index ky = model.response_size();

  CovariateTable at;
  at.add_numeric("x", {0.4});
  at.add_categorical("g", {"c"});
  const std::size_t gt = model.term_index("g");
  const EffectRegion cat = effect_region(model, fit, sum_of_terms({gt}, at), 0.95);
  const long group = model.terms()[gt].group_of(at, 0);
  const Eigen::Index start = (model.term_offset(gt) + group) * ky;
  CHECK(cat.center == fit.theta.segment(start, ky));
  CHECK((cat.covariance - fit.covariance.block(start, start, ky, ky)).cwiseAbs().maxCoeff() <=
        1e-12 * cat.covariance.cwiseAbs().maxCoeff());
  CHECK(cat.dimension() == ky);

  const EffectRegion icpt = effect_region(model, fit, sum_of_terms({0}, at), 0.95);
  CHECK(icpt.center == fit.theta.head(ky));
  CHECK(effect_matrix(model, sum_of_terms({0}, at)) == selection_matrix(model, 0));

  const std::size_t st = model.term_index("s(x)");
  const EffectRegion sim = simultaneous_region(model, fit, st, 0.95);
  CHECK(sim.dimension() == model.terms()[st].size() * ky);
  CHECK(sim.contains(sim.center));
  CHECK(sim.radius == doctest::Approx(chi2_quantile(0.95, static_cast<double>(sim.dimension()))));

  // signed sums are linear in the terms
  EffectQuery diff = sum_of_terms({gt, st}, at);
  diff[1].sign = -1.0;
  const Eigen::MatrixXd A = effect_matrix(model, diff);
  CHECK((A - effect_matrix(model, sum_of_terms({gt}, at)) + effect_matrix(model, sum_of_terms({st}, at)))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
}
