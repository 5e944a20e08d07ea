#include "densreg/fit.hpp"

#include <cmath>
#include <limits>

#include "densreg/error.hpp"

namespace densreg {

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::bayes: return "bayes";
    case ObjectiveKind::multinomial: return "multinomial";
    case ObjectiveKind::poisson: return "poisson";
  }
  return "?";
}

const char* to_string(InterceptMode mode) { return mode == InterceptMode::per_combo ? "per_combo" : "smooth"; }

NewtonResult fit_newton(const Objective& objective, const Eigen::VectorXd& start, const NewtonOptions& options) {
  NewtonResult out;
  out.params = start;
  out.evaluation = objective.evaluate(out.params);
  if (!std::isfinite(out.evaluation.value))
    throw Error(ErrorKind::invalid_argument, "objective is not finite at the starting point");
  out.trace.push_back(out.evaluation.value);
  int polish = 0;
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const Eigen::VectorXd& g = out.evaluation.gradient;
    const Eigen::VectorXd step = solve_positive(out.evaluation.fisher, g);
    const double current = out.evaluation.value;
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(current));
    // a step whose predicted gain is below rounding cannot shrink further
    const bool stalled = 0.5 * g.dot(step) <= slack;
    const bool small_gradient = g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
    if (small_gradient && (step.norm() <= options.step_tolerance || (stalled && polish >= 3))) {
      out.converged = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    if (small_gradient && stalled) {
      // flat directions: values no longer discriminate, so finish with plain Newton steps
      ++polish;
      out.params += step;
      out.evaluation = objective.evaluate(out.params);
      out.trace.push_back(out.evaluation.value);
      continue;
    }
    Eigen::VectorXd candidate;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      candidate = out.params + t * step;
      const double value = objective.evaluate(candidate, false).value;
      if (std::isfinite(value) && value >= current - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // within evaluation noise of the optimum the values cannot rank steps; trust Newton
      if (0.5 * g.dot(step) > 1e-10 * std::max(1.0, std::abs(current))) break;
      candidate = out.params + step;
    }
    out.params = candidate;
    out.evaluation = objective.evaluate(out.params);
    out.trace.push_back(out.evaluation.value);
  }
  out.gradient_norm = out.evaluation.gradient.lpNorm<Eigen::Infinity>();
  return out;
}

FitResult fit_objective(const Objective& objective, const NewtonOptions& options) {
  const NewtonResult nr = fit_newton(objective, objective.initial_point(), options);
  const Eigen::Index K = objective.theta_dimension();
  FitResult r;
  r.theta = nr.params.head(K);
  r.tau = nr.params.tail(nr.params.size() - K);
  r.fisher = nr.evaluation.fisher;
  r.covariance = inverse_leading(r.fisher, K);
  r.loglik = nr.evaluation.loglik;
  r.penalized_loglik = nr.evaluation.value;
  r.edf = static_cast<double>(objective.dimension()) - 2.0 * (objective.penalty() * r.covariance).trace();
  r.converged = nr.converged;
  r.iterations = nr.iterations;
  r.gradient_norm = nr.gradient_norm;
  r.trace = nr.trace;
  return r;
}

FitResult fit_binned(const Model& model, const BinnedDesign& design, const Smoothing& smoothing,
                     const FitOptions& options) {
  Eigen::MatrixXd P = model.penalty(smoothing);
  FitResult r;
  switch (options.objective) {
    case ObjectiveKind::multinomial:
      r = fit_objective(MultinomialObjective(model, design, std::move(P)), options.newton);
      break;
    case ObjectiveKind::poisson:
      r = fit_objective(PoissonObjective(model, design, std::move(P), options.intercepts), options.newton);
      break;
    case ObjectiveKind::bayes:
      throw Error(ErrorKind::invalid_argument, "the direct objective needs raw observations");
  }
  r.objective = options.objective;
  r.intercepts = options.intercepts;
  r.smoothing = smoothing;
  return r;
}

FitResult fit_direct_bayes(const Model& model, const CovariateTable& covariates, std::span<const double> ys,
                           std::span<const double> weights, const Smoothing& smoothing,
                           const NewtonOptions& options) {
  FitResult r = fit_objective(BayesObjective(model, covariates, ys, weights, model.penalty(smoothing)), options);
  r.objective = ObjectiveKind::bayes;
  r.smoothing = smoothing;
  return r;
}

SmoothingSelection select_smoothing(const Model& model, const BinnedDesign& design, const std::vector<double>& grid,
                                    const FitOptions& options) {
  for (double xi : grid)
    if (xi < 0.0) throw Error(ErrorKind::negative_smoothing, "smoothing grid values must be >= 0");
  const auto directions = model.automatic_directions();
  if (!directions.empty() && grid.empty()) throw Error(ErrorKind::invalid_argument, "empty smoothing grid");
  std::size_t total = 1;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    total *= grid.size();
    if (total > 100000) throw Error(ErrorKind::invalid_argument, "smoothing grid has too many combinations");
  }

  SmoothingSelection out;
  std::vector<std::vector<double>> values;
  bool have = false;
  FitResult best_fit;
  for (std::size_t c = 0; c < total; ++c) {
    Smoothing s = model.default_smoothing();
    std::vector<double> v(directions.size());
    std::size_t rest = c;
    for (std::size_t d = directions.size(); d-- > 0;) {
      v[d] = grid[rest % grid.size()];
      rest /= grid.size();
      auto& ts = s[directions[d].term];
      (directions[d].covariate_direction ? ts.xi_x : ts.xi_y) = v[d];
    }
    SmoothingCandidate cand;
    cand.smoothing = s;
    try {
      FitResult fit = fit_binned(model, design, s, options);
      cand.loglik = fit.loglik;
      cand.edf = fit.edf;
      cand.criterion = -2.0 * fit.loglik + 2.0 * fit.edf;
      cand.converged = fit.converged;
      if (fit.converged) {
        bool better = !have;
        if (have) {
          const double best = out.candidates[out.chosen].criterion;
          const double tol = 1e-9 * std::max(1.0, std::abs(best));
          if (cand.criterion < best - tol) better = true;
          else if (std::abs(cand.criterion - best) <= tol) better = v > values[out.chosen];
        }
        if (better) {
          out.chosen = out.candidates.size();
          best_fit = std::move(fit);
          have = true;
        }
      } else {
        cand.failure = "not converged";
      }
    } catch (const Error& e) {
      cand.failure = e.what();
      cand.criterion = std::numeric_limits<double>::infinity();
    }
    out.candidates.push_back(std::move(cand));
    values.push_back(std::move(v));
  }
  if (!have) throw Error(ErrorKind::max_iterations_exceeded, "no smoothing candidate converged");
  out.fit = std::move(best_fit);
  return out;
}

BinnedDesign bin_for_model(const Model& model, const Observations& data, int bins) {
  const auto& domain = model.domain();
  PartitionPtr partition;
  if (domain->has_interval()) partition = Partition::equidistant(domain->interval().lower, domain->interval().upper, bins);
  return bin_observations(domain, data.covariates, data.response, partition, data.weights);
}

RankReport check_model_ranks(const Model& model, const BinnedDesign& design) {
  const auto rows = cell_rows(model.response(), design);
  std::vector<Eigen::MatrixXd> dense;
  for (const auto& r : rows) {
    Eigen::MatrixXd m = *r.shared;
    for (std::size_t i = 0; i < r.replaced.size(); ++i) m.row(r.replaced[i]) = r.replacement.row(static_cast<Eigen::Index>(i));
    dense.push_back(std::move(m));
  }
  return check_rank_conditions(model.design(design.combos), dense);
}

FittedModel fit_model(const ModelSpec& spec, const Observations& data, int bins, const FitOptions& options,
                      const std::vector<double>& grid) {
  Model model = Model::compile(spec, data.covariates);
  BinnedDesign design = bin_for_model(model, data, bins);
  RankReport ranks = check_model_ranks(model, design);
  if (!model.automatic_directions().empty() && !grid.empty()) {
    SmoothingSelection sel = select_smoothing(model, design, grid, options);
    return FittedModel{std::move(model), std::move(design), std::move(sel.fit), std::move(ranks),
                       std::move(sel.candidates)};
  }
  FitResult fit = fit_binned(model, design, model.default_smoothing(), options);
  return FittedModel{std::move(model), std::move(design), std::move(fit), std::move(ranks), {}};
}

}  // namespace densreg
