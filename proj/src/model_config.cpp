#include "densreg/model_config.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "densreg/error.hpp"
#include "densreg/random.hpp"

namespace densreg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::config, where + ": " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where, std::string("bad value for '") + key + "'");
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  return get<T>(j, key, where, T{});
}

TermKind parse_kind(const std::string& s, const std::string& where) {
  for (auto k : {TermKind::intercept, TermKind::categorical, TermKind::linear, TermKind::smooth, TermKind::varying})
    if (s == to_string(k)) return k;
  fail(where, "unknown term kind '" + s + "'");
}

SmoothingValue parse_smoothing(const json& j, const char* key, const std::string& where) {
  SmoothingValue v;
  if (!j.contains(key)) return v;
  const json& x = j.at(key);
  if (x.is_string() && x.get<std::string>() == "auto") {
    v.automatic = true;
  } else if (x.is_number()) {
    v.value = x.get<double>();
    if (v.value < 0.0) throw Error(ErrorKind::negative_smoothing, where + ": '" + key + "' must be >= 0");
  } else {
    fail(where, std::string("'") + key + "' must be a number or \"auto\"");
  }
  return v;
}

json dump_smoothing(const SmoothingValue& v) { return v.automatic ? json("auto") : json(v.value); }

TermSpec parse_term(const json& j, std::size_t index) {
  const std::string where = "term " + std::to_string(index);
  check_keys(j, where,
             {"kind", "label", "covariate", "base", "factors", "reference", "levels", "functions", "degree",
              "penalty_order", "range", "center", "xi_x", "xi_y"});
  TermSpec t;
  t.kind = parse_kind(require<std::string>(j, "kind", where), where);
  t.label = get<std::string>(j, "label", where, "");
  t.covariate = get<std::string>(j, "covariate", where, "");
  if (j.contains("base")) t.base = parse_kind(require<std::string>(j, "base", where), where);
  t.factors = get<std::vector<std::string>>(j, "factors", where, {});
  t.reference = get<std::map<std::string, std::string>>(j, "reference", where, {});
  t.levels = get<std::map<std::string, std::vector<std::string>>>(j, "levels", where, {});
  t.spline.functions = get<int>(j, "functions", where, t.spline.functions);
  t.spline.degree = get<int>(j, "degree", where, t.spline.degree);
  t.spline.penalty_order = get<int>(j, "penalty_order", where, t.spline.penalty_order);
  if (j.contains("range")) {
    const auto r = get<std::vector<double>>(j, "range", where, {});
    if (r.size() != 2 || !(r[0] < r[1])) fail(where, "'range' must be [lower, upper] with lower < upper");
    t.spline.range = Interval{r[0], r[1]};
  }
  t.center = get<bool>(j, "center", where, true);
  t.xi_x = parse_smoothing(j, "xi_x", where);
  t.xi_y = parse_smoothing(j, "xi_y", where);
  const bool numeric = t.kind == TermKind::linear || t.kind == TermKind::smooth || t.kind == TermKind::varying;
  if (numeric && t.covariate.empty()) fail(where, "'covariate' is required for " + std::string(to_string(t.kind)) + " terms");
  if ((t.kind == TermKind::categorical || t.kind == TermKind::varying) && t.factors.empty())
    fail(where, "'factors' is required for " + std::string(to_string(t.kind)) + " terms");
  if (t.spline.functions < t.spline.degree + 1) fail(where, "too few spline functions for the degree");
  if (t.spline.penalty_order < 0 || t.spline.penalty_order >= t.spline.functions) fail(where, "bad penalty order");
  return t;
}

json dump_term(const TermSpec& t) {
  json j;
  j["kind"] = to_string(t.kind);
  if (!t.label.empty()) j["label"] = t.label;
  if (!t.covariate.empty()) j["covariate"] = t.covariate;
  if (t.kind == TermKind::varying) j["base"] = to_string(t.base);
  if (!t.factors.empty()) j["factors"] = t.factors;
  if (!t.reference.empty()) j["reference"] = t.reference;
  if (!t.levels.empty()) j["levels"] = t.levels;
  j["functions"] = t.spline.functions;
  j["degree"] = t.spline.degree;
  j["penalty_order"] = t.spline.penalty_order;
  if (t.spline.range) j["range"] = {t.spline.range->lower, t.spline.range->upper};
  j["center"] = t.center;
  j["xi_x"] = dump_smoothing(t.xi_x);
  j["xi_y"] = dump_smoothing(t.xi_y);
  return j;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, what + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ModelSpec model_from_json(const json& j) {
  check_keys(j, "model", {"response", "domain", "basis", "weights", "terms"});
  ModelSpec s;
  s.response = get<std::string>(j, "response", "model", s.response);
  s.weights = get<std::string>(j, "weights", "model", "");
  if (j.contains("domain")) {
    const json& d = j.at("domain");
    check_keys(d, "domain", {"interval", "atoms", "quadrature"});
    if (d.contains("interval")) {
      if (d.at("interval").is_null()) {
        s.interval.reset();
      } else {
        const auto r = get<std::vector<double>>(d, "interval", "domain", {});
        if (r.size() != 2) fail("domain", "'interval' must be [lower, upper] or null");
        s.interval = Interval{r[0], r[1]};
      }
    }
    if (d.contains("atoms")) {
      if (!d.at("atoms").is_array()) fail("domain", "'atoms' must be a list");
      for (const json& a : d.at("atoms")) {
        if (a.is_number()) {
          s.atoms.push_back({a.get<double>(), 1.0});
        } else {
          check_keys(a, "atom", {"at", "weight"});
          s.atoms.push_back({require<double>(a, "at", "atom"), get<double>(a, "weight", "atom", 1.0)});
        }
      }
    }
    s.quadrature_nodes = get<int>(d, "quadrature", "domain", s.quadrature_nodes);
  }
  if (j.contains("basis")) {
    const json& b = j.at("basis");
    check_keys(b, "basis", {"functions", "degree", "penalty_order"});
    s.basis.continuous_functions = get<int>(b, "functions", "basis", s.basis.continuous_functions);
    s.basis.degree = get<int>(b, "degree", "basis", s.basis.degree);
    s.basis.penalty_order = get<int>(b, "penalty_order", "basis", s.basis.penalty_order);
  }
  if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty())
    fail("model", "'terms' must be a nonempty list");
  for (std::size_t i = 0; i < j.at("terms").size(); ++i) s.terms.push_back(parse_term(j.at("terms")[i], i));
  return s;
}

json model_to_json(const ModelSpec& s) {
  json j;
  j["response"] = s.response;
  if (!s.weights.empty()) j["weights"] = s.weights;
  json d;
  d["interval"] = s.interval ? json{s.interval->lower, s.interval->upper} : json(nullptr);
  d["atoms"] = json::array();
  for (const auto& a : s.atoms) d["atoms"].push_back({{"at", a.location}, {"weight", a.weight}});
  d["quadrature"] = s.quadrature_nodes;
  j["domain"] = d;
  j["basis"] = {{"functions", s.basis.continuous_functions},
                {"degree", s.basis.degree},
                {"penalty_order", s.basis.penalty_order}};
  j["terms"] = json::array();
  for (const auto& t : s.terms) j["terms"].push_back(dump_term(t));
  return j;
}

}  // namespace

ModelSpec parse_model_config(const std::string& text) { return model_from_json(parse_json(text, "model config")); }

ModelSpec read_model_config(const std::filesystem::path& path) { return parse_model_config(slurp(path)); }

std::string dump_model_config(const ModelSpec& spec) { return model_to_json(spec).dump(); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ModelSpec& spec) { return fnv1a_hex(dump_model_config(spec)); }

SimScenario parse_scenario(const std::string& text) {
  const json j = parse_json(text, "scenario");
  check_keys(j, "scenario",
             {"model", "combos", "theta", "random_theta", "observations", "bins", "replications", "seed", "level",
              "smoothing", "smooth_intercepts"});
  SimScenario s;
  if (!j.contains("model")) fail("scenario", "missing 'model'");
  s.spec = model_from_json(j.at("model"));
  if (!j.contains("combos") || !j.at("combos").is_object()) fail("scenario", "'combos' must map columns to values");
  for (auto it = j.at("combos").begin(); it != j.at("combos").end(); ++it) {
    if (!it.value().is_array() || it.value().empty()) fail("scenario", "combo column '" + it.key() + "' must be a list");
    if (it.value()[0].is_string()) {
      s.combos.add_categorical(it.key(), get<std::vector<std::string>>(j.at("combos"), it.key().c_str(), "combos", {}));
    } else {
      s.combos.add_numeric(it.key(), get<std::vector<double>>(j.at("combos"), it.key().c_str(), "combos", {}));
    }
  }
  s.observations = get<std::size_t>(j, "observations", "scenario", s.observations);
  s.bins = get<std::vector<int>>(j, "bins", "scenario", s.bins);
  s.replications = get<std::size_t>(j, "replications", "scenario", s.replications);
  s.seed = get<std::uint64_t>(j, "seed", "scenario", s.seed);
  s.level = get<double>(j, "level", "scenario", s.level);
  if (!(s.level > 0.0 && s.level < 1.0)) fail("scenario", "'level' must lie in (0, 1)");
  if (get<bool>(j, "smooth_intercepts", "scenario", false)) s.fit.intercepts = InterceptMode::smooth;

  const Model model = Model::compile(s.spec, s.combos);
  if (j.contains("theta") == j.contains("random_theta")) fail("scenario", "give exactly one of 'theta' and 'random_theta'");
  if (j.contains("theta")) {
    const auto v = get<std::vector<double>>(j, "theta", "scenario", {});
    if (static_cast<Eigen::Index>(v.size()) != model.coefficient_size())
      fail("scenario", "'theta' needs " + std::to_string(model.coefficient_size()) + " values, got " +
                           std::to_string(v.size()));
    s.theta = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    const json& r = j.at("random_theta");
    check_keys(r, "random_theta", {"seed", "scale"});
    CounterRng rng(get<std::uint64_t>(r, "seed", "random_theta", 1), 0);
    const double scale = get<double>(r, "scale", "random_theta", 0.5);
    s.theta.resize(model.coefficient_size());
    for (Eigen::Index i = 0; i < s.theta.size(); ++i) s.theta(i) = scale * rng.normal();
  }
  s.smoothing = model.default_smoothing();
  if (j.contains("smoothing")) {
    const json& sm = j.at("smoothing");
    if (!sm.is_object()) fail("scenario", "'smoothing' must map term labels to values");
    for (auto it = sm.begin(); it != sm.end(); ++it) {
      const std::size_t t = model.term_index(it.key());
      check_keys(it.value(), "smoothing", {"xi_x", "xi_y"});
      s.smoothing[t].xi_x = get<double>(it.value(), "xi_x", "smoothing", s.smoothing[t].xi_x);
      s.smoothing[t].xi_y = get<double>(it.value(), "xi_y", "smoothing", s.smoothing[t].xi_y);
    }
  }
  return s;
}

SimScenario read_scenario(const std::filesystem::path& path) { return parse_scenario(slurp(path)); }

}  // namespace densreg
