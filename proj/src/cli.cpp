#include "densreg/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "densreg/error.hpp"
#include "densreg/inference.hpp"
#include "densreg/interpret.hpp"
#include "densreg/io.hpp"
#include "densreg/model_config.hpp"
#include "densreg/sim.hpp"

namespace densreg::cli {

namespace fs = std::filesystem;

namespace {

constexpr int exit_error = 1;
constexpr int exit_not_converged = 2;
constexpr int exit_rank_deficient = 3;

const std::vector<double> default_grid{0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0};

struct Settings {
  std::string data, model, out, fit, scenario, weights_col, reference, objective = "poisson";
  int bins = 100;
  int quadrature = 0;
  double alpha = 0.95;
  double threshold = 0.0;
  std::vector<double> xi;
  std::vector<double> xi_grid;
  std::vector<double> points;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::size_t samples = 0;
  std::size_t replications = 0;
  bool smooth_intercepts = false;
};

std::string fmt(double v) { return format_double(v); }

ModelSpec effective_spec(const Settings& s, const ModelSpec& source) {
  ModelSpec spec = source;
  if (s.quadrature > 0) spec.quadrature_nodes = s.quadrature;
  if (!s.weights_col.empty()) spec.weights = s.weights_col;
  if (!s.xi.empty()) {
    for (auto& t : spec.terms) {
      for (SmoothingValue* v : {&t.xi_x, &t.xi_y}) {
        if (!v->automatic) continue;
        v->automatic = false;
        v->value = s.xi.front();
      }
    }
  }
  return spec;
}

fs::path prepare_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

std::string direction_name(const Model& m, const SmoothingDirection& d) {
  return m.terms()[d.term].label() + (d.covariate_direction ? ":xi_x" : ":xi_y");
}

void report_ranks(const RankReport& r, const BinnedDesign& design, std::ostream& os, const char* prefix) {
  if (!r.covariate_ok())
    os << prefix << "covariate design has rank " << r.covariate_rank << " of " << r.covariate_size << "\n";
  for (auto l : r.deficient_combos)
    os << prefix << "combo " << l << " (" << design.combos.describe_row(l) << ") has response rank "
       << r.combo_ranks[l] << " of " << r.response_size + 1 << "\n";
}

int cmd_fit(const Settings& s) {
  const ModelSpec source = read_model_config(s.model);
  const std::string hash = config_hash(source);
  const ModelSpec spec = effective_spec(s, source);
  const Observations obs = load_observations(read_csv(s.data), spec, spec.weights);
  FitOptions options;
  if (s.objective == "multinomial") options.objective = ObjectiveKind::multinomial;
  if (s.smooth_intercepts) {
    if (options.objective != ObjectiveKind::poisson)
      throw Error(ErrorKind::config, "smooth intercepts need the poisson objective");
    options.intercepts = InterceptMode::smooth;
  }
  const std::vector<double> grid = s.xi_grid.empty() ? default_grid : s.xi_grid;
  const FittedModel fm = fit_model(spec, obs, s.bins, options, grid);
  report_ranks(fm.ranks, fm.design, std::cerr, "warning: ");

  const fs::path out = prepare_dir(s.out);
  save_artifact(out / "fit.json", make_artifact(fm, s.bins, hash));
  const Model& m = fm.model;
  const FitResult& f = fm.fit;
  const Eigen::Index ky = m.response_size();
  {
    CsvWriter w(out / "coefficients.csv", {"term", "basis", "response", "estimate", "std_error"}, hash);
    for (std::size_t j = 0; j < m.terms().size(); ++j)
      for (Eigen::Index b = 0; b < m.terms()[j].size(); ++b)
        for (Eigen::Index r = 0; r < ky; ++r) {
          const Eigen::Index i = (m.term_offset(j) + b) * ky + r;
          w.row({m.terms()[j].label(), std::to_string(b), std::to_string(r), fmt(f.theta(i)),
                 fmt(std::sqrt(std::max(0.0, f.covariance(i, i))))});
        }
  }
  {
    CsvWriter w(out / "smoothing.csv", {"term", "xi_x", "xi_y"}, hash);
    for (std::size_t j = 0; j < m.terms().size(); ++j)
      w.row({m.terms()[j].label(), fmt(f.smoothing[j].xi_x), fmt(f.smoothing[j].xi_y)});
  }
  if (!fm.candidates.empty()) {
    const auto dirs = m.automatic_directions();
    std::vector<std::string> header{"candidate"};
    for (const auto& d : dirs) header.push_back(direction_name(m, d));
    for (const char* c : {"criterion", "edf", "loglik", "converged"}) header.push_back(c);
    CsvWriter w(out / "selection.csv", header, hash);
    for (std::size_t c = 0; c < fm.candidates.size(); ++c) {
      const auto& cand = fm.candidates[c];
      std::vector<std::string> row{std::to_string(c)};
      for (const auto& d : dirs)
        row.push_back(fmt(d.covariate_direction ? cand.smoothing[d.term].xi_x : cand.smoothing[d.term].xi_y));
      row.insert(row.end(), {fmt(cand.criterion), fmt(cand.edf), fmt(cand.loglik), cand.converged ? "1" : "0"});
      w.row(row);
    }
  }
  {
    CsvWriter w(out / "trace.csv", {"iteration", "objective"}, hash);
    for (std::size_t i = 0; i < f.trace.size(); ++i) w.row({std::to_string(i), fmt(f.trace[i])});
  }
  write_design(out / "design.csv", fm.design, hash);

  std::cout << "observations " << obs.response.size() << ", combos " << fm.design.combo_count() << ", coefficients "
            << f.theta.size() << "\n"
            << "loglik " << fmt(f.loglik) << ", penalized " << fmt(f.penalized_loglik) << ", edf " << fmt(f.edf) << "\n"
            << (f.converged ? "converged" : "NOT converged") << " after " << f.iterations << " iterations, gradient "
            << fmt(f.gradient_norm) << "\n";
  return f.converged ? 0 : exit_not_converged;
}

struct Loaded {
  FitArtifact artifact;
  Model model;
  CovariateTable rows;
  std::string hash;
};

Loaded load_fitted(const Settings& s) {
  FitArtifact a = load_artifact(s.fit);
  if (!s.model.empty()) check_artifact_config(a, read_model_config(s.model));
  Model m = a.model();
  CovariateTable rows = load_covariates(read_csv(s.data), a.spec);
  if (rows.rows() == 0) throw Error(ErrorKind::parse, "data has no rows");
  std::string hash = a.config_hash;
  return {std::move(a), std::move(m), std::move(rows), std::move(hash)};
}

std::optional<ReferenceCoding> reference_coding(const Settings& s, const Model& m) {
  if (s.reference.empty()) return std::nullopt;
  const auto eq = s.reference.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::config, "--reference expects COV=VALUE");
  const std::string value = s.reference.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw Error(ErrorKind::config, "--reference value '" + value + "' is not a number");
  return ReferenceCoding(m, s.reference.substr(0, eq), v);
}

EffectQuery term_query(const std::optional<ReferenceCoding>& ref, std::size_t term, const CovariateTable& x,
                       std::size_t row) {
  return ref ? ref->query(term, x, row) : sum_of_terms({term}, x, row);
}

void grid_rows(CsvWriter& w, std::vector<std::string> prefix, const GridFunction& g) {
  const auto& d = *g.domain;
  auto emit = [&](const char* kind, double y, double v) {
    auto row = prefix;
    row.insert(row.end(), {kind, fmt(y), fmt(v)});
    w.row(row);
  };
  for (Eigen::Index i = 0; i < g.continuous.size(); ++i) emit("node", d.nodes()(i), g.continuous(i));
  for (std::size_t k = 0; k < d.atom_count(); ++k) emit("atom", d.atoms()[k].location, g.atoms(static_cast<Eigen::Index>(k)));
}

int cmd_predict(const Settings& s) {
  const Loaded in = load_fitted(s);
  const Model& m = in.model;
  const Eigen::MatrixXd bx = m.design(in.rows);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Theta(
      in.artifact.fit.theta.data(), m.covariate_size(), m.response_size());
  CsvWriter w(s.out, {"row", "kind", "y", "clr", "density"}, in.hash);
  for (std::size_t l = 0; l < in.rows.rows(); ++l) {
    const GridFunction clr = m.response().combine(Theta.transpose() * bx.row(static_cast<Eigen::Index>(l)).transpose());
    const GridFunction p = inv_clr(clr).probability();
    const auto& d = *m.domain();
    for (Eigen::Index i = 0; i < clr.continuous.size(); ++i)
      w.row({std::to_string(l), "node", fmt(d.nodes()(i)), fmt(clr.continuous(i)), fmt(p.continuous(i))});
    for (std::size_t k = 0; k < d.atom_count(); ++k) {
      const auto e = static_cast<Eigen::Index>(k);
      w.row({std::to_string(l), "atom", fmt(d.atoms()[k].location), fmt(clr.atoms(e)), fmt(p.atoms(e))});
    }
  }
  return 0;
}

int cmd_effects(const Settings& s) {
  const Loaded in = load_fitted(s);
  const auto ref = reference_coding(s, in.model);
  CsvWriter w(s.out, {"row", "term", "kind", "y", "clr"}, in.hash);
  for (std::size_t l = 0; l < in.rows.rows(); ++l)
    for (std::size_t j = 0; j < in.model.terms().size(); ++j)
      grid_rows(w, {std::to_string(l), in.model.terms()[j].label()},
                effect_function(in.model, in.artifact.fit.theta, term_query(ref, j, in.rows, l)));
  return 0;
}

int cmd_region(const Settings& s) {
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw Error(ErrorKind::config, "--alpha must lie in (0, 1)");
  const Loaded in = load_fitted(s);
  const Model& m = in.model;
  const FitResult& f = in.artifact.fit;
  const auto ref = reference_coding(s, m);
  const fs::path out = prepare_dir(s.out);
  const std::vector<std::string> stats{"dimension", "level", "radius", "statistic", "p_value", "floored"};
  auto describe = [](const EffectRegion& r) {
    const double stat = r.statistic(Eigen::VectorXd::Zero(r.dimension()));
    return std::vector<std::string>{std::to_string(r.dimension()), fmt(r.level), fmt(r.radius), fmt(stat),
                                    fmt(p_value(r)), r.floored ? "1" : "0"};
  };
  auto header = [&](std::vector<std::string> h) {
    h.insert(h.end(), stats.begin(), stats.end());
    return h;
  };
  CsvWriter pointwise(out / "regions.csv", header({"row", "term"}), in.hash);
  std::optional<CsvWriter> samples;
  if (s.samples > 0) samples.emplace(out / "samples.csv", std::vector<std::string>{"row", "term", "sample", "kind", "y", "clr"}, in.hash);
  std::size_t stream = 0;
  for (std::size_t l = 0; l < in.rows.rows(); ++l)
    for (std::size_t j = 0; j < m.terms().size(); ++j, ++stream) {
      const EffectQuery q = term_query(ref, j, in.rows, l);
      if (effect_matrix(m, q).isZero(0.0)) {
        // identically zero effect, e.g. at a reference level
        std::vector<std::string> row{std::to_string(l), m.terms()[j].label()};
        row.insert(row.end(), {"0", fmt(s.alpha), "NA", "NA", "NA", "NA"});
        pointwise.row(row);
        continue;
      }
      const EffectRegion r = effect_region(m, f, q, s.alpha);
      auto row = describe(r);
      row.insert(row.begin(), {std::to_string(l), m.terms()[j].label()});
      pointwise.row(row);
      if (samples) {
        const auto draws = sample_region(r, s.samples, s.seed + 0x9e3779b97f4a7c15ULL * stream);
        for (std::size_t k = 0; k < draws.size(); ++k)
          grid_rows(*samples, {std::to_string(l), m.terms()[j].label(), std::to_string(k)}, m.response().combine(draws[k]));
      }
    }
  CsvWriter simultaneous(out / "simultaneous.csv", header({"term"}), in.hash);
  for (std::size_t j = 0; j < m.terms().size(); ++j) {
    auto row = describe(simultaneous_region(m, f, j, s.alpha));
    row.insert(row.begin(), m.terms()[j].label());
    simultaneous.row(row);
  }
  return 0;
}

int cmd_interpret(const Settings& s) {
  const Loaded in = load_fitted(s);
  const Model& m = in.model;
  const auto ref = reference_coding(s, m);
  const auto& d = *m.domain();
  std::vector<double> points = s.points;
  if (points.empty()) {
    for (const auto& a : d.atoms()) points.push_back(a.location);
    if (d.has_interval()) {
      const auto [lo, hi] = d.interval();
      for (double q : {0.25, 0.5, 0.75}) points.push_back(lo + q * (hi - lo));
    }
  }
  const fs::path out = prepare_dir(s.out);
  CsvWriter odds(out / "odds.csv", {"row", "term", "s", "t", "log_odds_ratio", "odds_ratio"}, in.hash);
  CsvWriter sets(out / "sets.csv", {"row", "term", "threshold", "set", "kind", "lower", "upper"}, in.hash);
  for (std::size_t l = 0; l < in.rows.rows(); ++l)
    for (std::size_t j = 0; j < m.terms().size(); ++j) {
      const std::string row = std::to_string(l), term = m.terms()[j].label();
      const GridFunction e = effect_function(m, in.artifact.fit.theta, term_query(ref, j, in.rows, l));
      for (double a : points)
        for (double b : points) {
          const OddsRatio o = odds_ratio(e, a, b);
          odds.row({row, term, fmt(a), fmt(b), fmt(o.log_ratio), fmt(o.ratio)});
        }
      const MassShiftSets ms = mass_shift_sets(e, s.threshold);
      for (bool plus : {true, false}) {
        const char* name = plus ? "plus" : "minus";
        for (const auto& i : plus ? ms.plus : ms.minus)
          sets.row({row, term, fmt(s.threshold), name, "interval", fmt(i.lower), fmt(i.upper)});
        for (std::size_t k = 0; k < d.atom_count(); ++k)
          if (ms.plus_atoms[k] == plus)
            sets.row({row, term, fmt(s.threshold), name, "atom", fmt(d.atoms()[k].location), fmt(d.atoms()[k].location)});
      }
    }
  return 0;
}

int cmd_simulate(const Settings& s) {
  SimScenario sc = read_scenario(s.scenario);
  if (s.seed_given) sc.seed = s.seed;
  if (s.replications > 0) sc.replications = s.replications;
  const std::string hash = config_hash(sc.spec);
  const CoverageReport rep = coverage_experiment(sc);
  const fs::path out = prepare_dir(s.out);
  {
    CsvWriter w(out / "records.csv", {"replication", "bins", "effect", "region", "relmse", "covered", "total"}, hash);
    for (const auto& r : rep.records)
      w.row({std::to_string(r.replication), std::to_string(r.bins), r.effect, r.region, fmt(r.relmse),
             std::to_string(r.covered), std::to_string(r.total)});
  }
  CsvWriter w(out / "summary.csv",
              {"effect", "bins", "pointwise_coverage", "simultaneous_coverage", "median_relmse", "fits"}, hash);
  for (const auto& e : rep.effects) {
    const std::string sim = e.simultaneous_total ? fmt(e.simultaneous_rate()) : "NA";
    w.row({e.name, std::to_string(e.bins), e.pointwise_total ? fmt(e.pointwise_rate()) : "NA", sim,
           e.relmse.empty() ? "NA" : fmt(e.median_relmse()), std::to_string(e.relmse.size())});
    std::cout << e.name << " (G=" << e.bins << "): pointwise " << (e.pointwise_total ? fmt(e.pointwise_rate()) : "NA")
              << ", simultaneous " << sim << ", median relMSE " << (e.relmse.empty() ? "NA" : fmt(e.median_relmse()))
              << "\n";
  }
  if (rep.failures > 0) {
    std::cerr << "densreg: " << rep.failures << " fits failed\n";
    return exit_not_converged;
  }
  return 0;
}

int cmd_check(const Settings& s) {
  const ModelSpec spec = effective_spec(s, read_model_config(s.model));
  const Observations obs = load_observations(read_csv(s.data), spec, spec.weights);
  const Model m = Model::compile(spec, obs.covariates);
  const BinnedDesign design = bin_for_model(m, obs, s.bins);
  const RankReport r = check_model_ranks(m, design);
  std::cout << "covariate design: rank " << r.covariate_rank << " of " << r.covariate_size
            << (r.covariate_ok() ? " (ok)" : " (deficient)") << "\n";
  std::cout << "response designs: " << design.combo_count() - r.deficient_combos.size() << " of "
            << design.combo_count() << " combos reach rank " << r.response_size + 1 << "\n";
  report_ranks(r, design, std::cout, "  ");
  if (!s.out.empty()) write_design(s.out, design, config_hash(read_model_config(s.model)));
  return r.ok() ? 0 : exit_rank_deficient;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Density regression with mixed Bayes-space responses"};
  app.set_version_flag("--version", std::string("densreg ") + version());
  app.require_subcommand(1);
  Settings s;

  auto data = [&](CLI::App* c, bool required = true) {
    auto* o = c->add_option("--data", s.data, "CSV data file")->check(CLI::ExistingFile);
    if (required) o->required();
  };
  auto model = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--model", s.model, "JSON model config")->check(CLI::ExistingFile);
    if (required) o->required();
  };
  auto fitfile = [&](CLI::App* c) { c->add_option("--fit", s.fit, "fit artifact written by 'fit'")->required(); };
  auto reference = [&](CLI::App* c) {
    c->add_option("--reference", s.reference, "re-express effects relative to COV=VALUE");
  };
  auto knobs = [&](CLI::App* c) {
    c->add_option("--bins", s.bins, "number of equidistant bins")->check(CLI::PositiveNumber);
    c->add_option("--quadrature", s.quadrature, "quadrature nodes (odd)")->check(CLI::PositiveNumber);
    c->add_option("--weights-col", s.weights_col, "sample-weight column");
  };

  auto* fit = app.add_subcommand("fit", "fit a model and write coefficients and diagnostics");
  data(fit);
  model(fit, true);
  fit->add_option("--out", s.out, "output directory")->required();
  knobs(fit);
  auto* xi = fit->add_option("--xi", s.xi, "fixed value for every automatic smoothing parameter")->expected(1);
  fit->add_option("--xi-grid", s.xi_grid, "grid for automatic smoothing parameters")->delimiter(',')->excludes(xi);
  fit->add_flag("--smooth-intercepts", s.smooth_intercepts, "smooth Poisson intercepts instead of one per combo");
  fit->add_option("--objective", s.objective, "poisson or multinomial")->check(CLI::IsMember({"poisson", "multinomial"}));

  auto* predict = app.add_subcommand("predict", "predicted conditional densities for covariate rows");
  fitfile(predict);
  data(predict);
  model(predict, false);
  predict->add_option("--out", s.out, "output CSV")->required();

  auto* effects = app.add_subcommand("effects", "partial effects (clr) for covariate rows");
  fitfile(effects);
  data(effects);
  model(effects, false);
  reference(effects);
  effects->add_option("--out", s.out, "output CSV")->required();

  auto* region = app.add_subcommand("region", "confidence regions and p-values for partial effects");
  fitfile(region);
  data(region);
  model(region, false);
  reference(region);
  region->add_option("--out", s.out, "output directory")->required();
  region->add_option("--alpha", s.alpha, "confidence level");
  region->add_option("--samples", s.samples, "draws per region written to samples.csv");
  region->add_option("--seed", s.seed, "seed for region draws");

  auto* interpret = app.add_subcommand("interpret", "odds ratios and mass-shift sets");
  fitfile(interpret);
  data(interpret);
  model(interpret, false);
  reference(interpret);
  interpret->add_option("--out", s.out, "output directory")->required();
  interpret->add_option("--points", s.points, "response values for the odds table")->delimiter(',');
  interpret->add_option("--threshold", s.threshold, "clr threshold of the mass-shift sets");

  auto* simulate = app.add_subcommand("simulate", "coverage and relMSE simulation");
  simulate->add_option("--scenario", s.scenario, "JSON scenario")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", s.out, "output directory")->required();
  auto* seed = simulate->add_option("--seed", s.seed, "override the scenario seed");
  simulate->add_option("--replications", s.replications, "override the replication count");

  auto* check = app.add_subcommand("check", "rank conditions of a model on data");
  data(check);
  model(check, true);
  knobs(check);
  check->add_option("--out", s.out, "optional CSV of the binned design");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  s.seed_given = seed->count() > 0;

  try {
    if (*fit) return cmd_fit(s);
    if (*predict) return cmd_predict(s);
    if (*effects) return cmd_effects(s);
    if (*region) return cmd_region(s);
    if (*interpret) return cmd_interpret(s);
    if (*simulate) return cmd_simulate(s);
    if (*check) return cmd_check(s);
  } catch (const Error& e) {
    std::cerr << "densreg: error: " << e.what() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "densreg: error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}

}  // namespace densreg::cli
