#pragma once

// Synthetic models and data shared by unit and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "densreg/fit.hpp"
#include "densreg/model.hpp"
#include "densreg/random.hpp"

namespace fixture {

inline densreg::TermSpec intercept() { return {}; }

inline densreg::TermSpec categorical(const std::string& factor) {
  densreg::TermSpec t;
  t.kind = densreg::TermKind::categorical;
  t.factors = {factor};
  return t;
}

inline densreg::TermSpec smooth(const std::string& covariate, int functions) {
  densreg::TermSpec t;
  t.kind = densreg::TermKind::smooth;
  t.covariate = covariate;
  t.spline.functions = functions;
  return t;
}

inline densreg::TermSpec linear(const std::string& covariate) {
  densreg::TermSpec t;
  t.kind = densreg::TermKind::linear;
  t.covariate = covariate;
  return t;
}

/// Response on [0, 1] with atoms at 0 and 1 (unit weights).
inline densreg::ModelSpec mixed_spec(int continuous_functions = 6, int quadrature = 1001) {
  densreg::ModelSpec s;
  s.interval = densreg::Interval{0.0, 1.0};
  s.atoms = {{0.0, 1.0}, {1.0, 1.0}};
  s.quadrature_nodes = quadrature;
  s.basis.continuous_functions = continuous_functions;
  return s;
}

/// Zero-inflated, one-inflated continuous shares whose shape depends on g and x.
inline densreg::Observations mixed_data(std::uint64_t seed, std::size_t n, int x_values = 6) {
  densreg::CounterRng rng(seed, 0);
  densreg::Observations d;
  std::vector<std::string> g(n);
  std::vector<double> x(n);
  d.response.resize(n);
  const char* levels[] = {"a", "b", "c"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto gi = static_cast<int>(rng.uniform() * 3.0);
    g[i] = levels[gi];
    x[i] = std::floor(rng.uniform() * x_values) / (x_values - 1);
    const double u = rng.uniform();
    const double p0 = 0.12 + 0.05 * gi, p1 = 0.08 + 0.06 * x[i];
    if (u < p0) {
      d.response[i] = 0.0;
    } else if (u < p0 + p1) {
      d.response[i] = 1.0;
    } else {
      const double shape = 1.5 + gi + x[i];
      d.response[i] = std::pow(rng.uniform_open(), 1.0 / shape) * (0.3 + 0.7 * rng.uniform_open());
    }
  }
  d.covariates.add_categorical("g", g);
  d.covariates.add_numeric("x", x);
  return d;
}

/// intercept + g + s(x) on the mixed domain.
inline densreg::ModelSpec mixed_model_spec(int continuous_functions = 6, int quadrature = 1001) {
  auto s = mixed_spec(continuous_functions, quadrature);
  s.terms = {intercept(), categorical("g"), smooth("x", 5)};
  return s;
}

inline densreg::Smoothing smoothing(const densreg::Model& m, double xi_x, double xi_y) {
  densreg::Smoothing s(m.terms().size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    s[j].xi_x = m.terms()[j].has_x_penalty() ? xi_x : 0.0;
    s[j].xi_y = xi_y;
  }
  return s;
}

inline Eigen::VectorXd random_vector(densreg::CounterRng& rng, Eigen::Index n, double scale) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace fixture
