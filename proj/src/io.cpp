#include "densreg/io.hpp"

#include <charconv>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>

#include "densreg/error.hpp"
#include "densreg/model_config.hpp"

namespace densreg {

using nlohmann::json;

const char* version() { return DENSREG_VERSION; }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw Error(ErrorKind::config, "data has no column '" + name + "'");
}

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& source, std::size_t line, std::size_t col,
                    const std::string& name) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error(ErrorKind::parse, source + ": line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                                      " ('" + name + "'): cannot read '" + text + "' as a number");
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> numeric_column(const CsvTable& t, const std::string& name, const std::string& source) {
  const std::size_t c = t.column(name);
  std::vector<double> out(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out[r] = parse_number(t.rows[r][c], source, t.lines[r], c, name);
  return out;
}

std::vector<std::string> string_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<std::string> out(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out[r] = t.rows[r][c];
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      std::set<std::string> seen;
      for (const auto& h : t.header)
        if (h.empty() || !seen.insert(h).second)
          throw Error(ErrorKind::parse, source + ": line " + std::to_string(number) + ": empty or duplicate column name '" + h + "'");
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(ErrorKind::parse, source + ": line " + std::to_string(number) + ": expected " +
                                        std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.lines.push_back(number);
  }
  if (t.header.empty()) throw Error(ErrorKind::parse, source + ": no header row");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(slurp(path), path.string()); }

CovariateTable load_covariates(const CsvTable& table, const ModelSpec& spec) {
  std::vector<std::string> categorical, numeric;
  auto add = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& t : spec.terms) {
    for (const auto& f : t.factors) add(categorical, f);
    if (t.kind == TermKind::linear || t.kind == TermKind::smooth || t.kind == TermKind::varying) add(numeric, t.covariate);
  }
  for (const auto& n : numeric)
    if (std::find(categorical.begin(), categorical.end(), n) != categorical.end())
      throw Error(ErrorKind::config, "column '" + n + "' is used both as a factor and as a numeric covariate");
  // missing columns are reported before any value is parsed
  for (const auto& v : {categorical, numeric})
    for (const auto& name : v)
      if (!table.has(name)) throw Error(ErrorKind::config, "model config names column '" + name + "' which the data lacks");
  CovariateTable x;
  for (const auto& name : categorical) x.add_categorical(name, string_column(table, name));
  for (const auto& name : numeric) x.add_numeric(name, numeric_column(table, name, "data"));
  return x;
}

Observations load_observations(const CsvTable& table, const ModelSpec& spec, const std::string& weights_column) {
  if (table.rows.empty()) throw Error(ErrorKind::parse, "data has no rows");
  if (!table.has(spec.response))
    throw Error(ErrorKind::config, "model config names response column '" + spec.response + "' which the data lacks");
  const std::string w = weights_column.empty() ? spec.weights : weights_column;
  if (!w.empty() && !table.has(w))
    throw Error(ErrorKind::config, "weight column '" + w + "' is missing from the data");
  Observations obs;
  obs.covariates = load_covariates(table, spec);
  obs.response = numeric_column(table, spec.response, "data");
  if (!w.empty()) obs.weights = numeric_column(table, w, "data");
  return obs;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, const std::string& hash)
    : out_(path, std::ios::binary), width_(header.size()), path_(path) {
  if (!out_) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
  out_ << "# densreg " << version() << " config=" << hash << "\n";
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorKind::invalid_argument, "CSV row width mismatch for " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
  if (!out_) throw Error(ErrorKind::config, "failed writing '" + path_.string() + "'");
}

void write_grid_function(const std::filesystem::path& path, const GridFunction& f, const std::string& hash) {
  CsvWriter w(path, {"kind", "y", "value"}, hash);
  const auto& d = *f.domain;
  for (Eigen::Index i = 0; i < f.continuous.size(); ++i)
    w.row({"node", format_double(d.nodes()(i)), format_double(f.continuous(i))});
  for (std::size_t k = 0; k < d.atom_count(); ++k)
    w.row({"atom", format_double(d.atoms()[k].location), format_double(f.atoms(static_cast<Eigen::Index>(k)))});
}

GridFunction read_grid_function(const std::filesystem::path& path, const DomainPtr& domain) {
  const CsvTable t = read_csv(path);
  const std::size_t kc = t.column("kind"), yc = t.column("y"), vc = t.column("value");
  GridFunction f = GridFunction::constant(domain, 0.0);
  Eigen::Index node = 0, atom = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double y = parse_number(t.rows[r][yc], path.string(), t.lines[r], yc, "y");
    const double v = parse_number(t.rows[r][vc], path.string(), t.lines[r], vc, "value");
    const std::string& kind = t.rows[r][kc];
    if (kind == "node" && node < f.continuous.size() && y == domain->nodes()(node)) {
      f.continuous(node++) = v;
    } else if (kind == "atom" && atom < f.atoms.size() && y == domain->atoms()[static_cast<std::size_t>(atom)].location) {
      f.atoms(atom++) = v;
    } else {
      throw Error(ErrorKind::domain_mismatch, path.string() + ": line " + std::to_string(t.lines[r]) +
                                                  " does not match the domain grid");
    }
  }
  if (node != f.continuous.size() || atom != f.atoms.size())
    throw Error(ErrorKind::domain_mismatch, path.string() + ": grid function is incomplete");
  return f;
}

void write_design(const std::filesystem::path& path, const BinnedDesign& design, const std::string& hash) {
  CsvWriter w(path, {"combo", "cell", "representative", "width", "count", "weight", "offset"}, hash);
  for (std::size_t l = 0; l < design.combo_count(); ++l) {
    const auto& cells = design.cells[l].cells;
    for (std::size_t g = 0; g < cells.size(); ++g) {
      const Cell& c = cells[g];
      w.row({std::to_string(l), std::to_string(g), format_double(c.representative), format_double(c.width),
             format_double(c.count), format_double(c.weight), format_double(c.offset)});
    }
  }
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw Error(ErrorKind::parse, "matrix row count mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(data[i].size()) != cols) throw Error(ErrorKind::parse, "matrix column count mismatch");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[i][k].get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ObjectiveKind objective_from(const std::string& s) {
  for (auto k : {ObjectiveKind::bayes, ObjectiveKind::multinomial, ObjectiveKind::poisson})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::parse, "unknown objective '" + s + "'");
}

}  // namespace

Model FitArtifact::model() const {
  if (states.size() != spec.terms.size()) throw Error(ErrorKind::parse, "fit artifact has the wrong number of term states");
  std::vector<CovariateBasis> terms;
  for (std::size_t j = 0; j < states.size(); ++j) terms.emplace_back(spec.terms[j], states[j]);
  return Model(spec, std::move(terms));
}

FitArtifact make_artifact(const FittedModel& fitted, int bins, const std::string& hash) {
  FitArtifact a;
  a.version = version();
  a.spec = fitted.model.spec();
  a.config_hash = hash.empty() ? config_hash(a.spec) : hash;
  for (const auto& t : fitted.model.terms()) a.states.push_back(t.state());
  a.bins = bins;
  a.fit = fitted.fit;
  return a;
}

std::string dump_artifact(const FitArtifact& a) {
  json j;
  j["densreg"] = a.version;
  j["config_hash"] = a.config_hash;
  j["model"] = json::parse(dump_model_config(a.spec));
  j["bins"] = a.bins;
  json states = json::array();
  for (const auto& s : a.states) {
    json st;
    st["factors"] = json::array();
    for (const auto& f : s.factors) st["factors"].push_back({{"name", f.name}, {"levels", f.levels}, {"reference", f.reference}});
    st["knots"] = s.knots;
    st["range"] = {s.range.lower, s.range.upper};
    st["means"] = s.means;
    st["transforms"] = json::array();
    for (const auto& t : s.transforms) st["transforms"].push_back(matrix_json(t));
    states.push_back(std::move(st));
  }
  j["states"] = std::move(states);
  const FitResult& f = a.fit;
  json fit;
  fit["objective"] = to_string(f.objective);
  fit["intercepts"] = to_string(f.intercepts);
  fit["theta"] = vector_json(f.theta);
  fit["tau"] = vector_json(f.tau);
  fit["smoothing"] = json::array();
  for (const auto& s : f.smoothing) fit["smoothing"].push_back({{"xi_x", s.xi_x}, {"xi_y", s.xi_y}});
  fit["fisher"] = {{"leading", matrix_json(f.fisher.leading)},
                   {"coupling", matrix_json(f.fisher.coupling)},
                   {"tail", vector_json(f.fisher.tail)}};
  fit["covariance"] = matrix_json(f.covariance);
  fit["loglik"] = f.loglik;
  fit["penalized_loglik"] = f.penalized_loglik;
  fit["edf"] = f.edf;
  fit["converged"] = f.converged;
  fit["iterations"] = f.iterations;
  fit["gradient_norm"] = f.gradient_norm;
  fit["trace"] = f.trace;
  j["fit"] = std::move(fit);
  return j.dump(1) + "\n";
}

FitArtifact parse_artifact(const std::string& text) {
  FitArtifact a;
  try {
    const json j = json::parse(text);
    a.version = j.at("densreg").get<std::string>();
    if (a.version != version())
      throw Error(ErrorKind::config, "fit artifact was written by densreg " + a.version + ", this is " + version());
    a.config_hash = j.at("config_hash").get<std::string>();
    a.spec = parse_model_config(j.at("model").dump());
    a.bins = j.at("bins").get<int>();
    for (const json& st : j.at("states")) {
      TermState s;
      for (const json& f : st.at("factors"))
        s.factors.push_back({f.at("name").get<std::string>(), f.at("levels").get<std::vector<std::string>>(),
                             f.at("reference").get<std::size_t>()});
      s.knots = st.at("knots").get<std::vector<double>>();
      const auto r = st.at("range").get<std::vector<double>>();
      s.range = {r.at(0), r.at(1)};
      s.means = st.at("means").get<std::vector<double>>();
      for (const json& t : st.at("transforms")) s.transforms.push_back(matrix_from(t));
      a.states.push_back(std::move(s));
    }
    const json& f = j.at("fit");
    FitResult& r = a.fit;
    r.objective = objective_from(f.at("objective").get<std::string>());
    r.intercepts = f.at("intercepts").get<std::string>() == "smooth" ? InterceptMode::smooth : InterceptMode::per_combo;
    r.theta = vector_from(f.at("theta"));
    r.tau = vector_from(f.at("tau"));
    for (const json& s : f.at("smoothing")) r.smoothing.push_back({s.at("xi_x").get<double>(), s.at("xi_y").get<double>()});
    r.fisher.leading = matrix_from(f.at("fisher").at("leading"));
    r.fisher.coupling = matrix_from(f.at("fisher").at("coupling"));
    r.fisher.tail = vector_from(f.at("fisher").at("tail"));
    r.covariance = matrix_from(f.at("covariance"));
    r.loglik = f.at("loglik").get<double>();
    r.penalized_loglik = f.at("penalized_loglik").get<double>();
    r.edf = f.at("edf").get<double>();
    r.converged = f.at("converged").get<bool>();
    r.iterations = f.at("iterations").get<int>();
    r.gradient_norm = f.at("gradient_norm").get<double>();
    r.trace = f.at("trace").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed fit artifact: ") + e.what());
  }
  const Model m = a.model();
  if (a.fit.theta.size() != m.coefficient_size())
    throw Error(ErrorKind::parse, "fit artifact coefficients do not match the model size");
  return a;
}

void save_artifact(const std::filesystem::path& path, const FitArtifact& artifact) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
  out << dump_artifact(artifact);
}

FitArtifact load_artifact(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::config, "no fit artifact at '" + path.string() + "'; run fit first");
  return parse_artifact(slurp(path));
}

void check_artifact_config(const FitArtifact& artifact, const ModelSpec& spec) {
  const std::string h = config_hash(spec);
  if (h != artifact.config_hash)
    throw Error(ErrorKind::config, "model config (hash " + h + ") differs from the one the fit used (hash " +
                                       artifact.config_hash + ")");
}

}  // namespace densreg
