#include "densreg/model.hpp"

#include <algorithm>
#include <set>

#include "densreg/bspline.hpp"
#include "densreg/error.hpp"

namespace densreg {

const char* to_string(TermKind kind) {
  switch (kind) {
    case TermKind::intercept: return "intercept";
    case TermKind::categorical: return "categorical";
    case TermKind::linear: return "linear";
    case TermKind::smooth: return "smooth";
    case TermKind::varying: return "varying";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string default_label(const TermSpec& s) {
  switch (s.kind) {
    case TermKind::intercept: return "intercept";
    case TermKind::categorical: return join(s.factors, ":");
    case TermKind::linear: return s.covariate;
    case TermKind::smooth: return "s(" + s.covariate + ")";
    case TermKind::varying:
      return (s.base == TermKind::smooth ? "s(" + s.covariate + ")" : s.covariate) + ":" + join(s.factors, ":");
  }
  return "term";
}

bool uses_factors(TermKind k) { return k == TermKind::categorical || k == TermKind::varying; }

TermKind base_kind(const TermSpec& s) { return s.kind == TermKind::varying ? s.base : s.kind; }

}  // namespace

CovariateBasis::CovariateBasis(TermSpec spec, TermState state) : spec_(std::move(spec)), state_(std::move(state)) {
  finalize();
}

void CovariateBasis::finalize() {
  label_ = spec_.label.empty() ? default_label(spec_) : spec_.label;
  const std::size_t groups = group_count();
  switch (spec_.kind) {
    case TermKind::intercept: size_ = 1; break;
    case TermKind::categorical: size_ = static_cast<Eigen::Index>(groups); break;
    default: size_ = static_cast<Eigen::Index>(groups) * base_size(); break;
  }
  if (size_ == 0) throw Error(ErrorKind::degenerate_basis, "term '" + label_ + "' has no basis functions");
  penalty_ = Eigen::MatrixXd::Zero(size_, size_);
  if (has_x_penalty()) {
    const Eigen::MatrixXd raw = difference_penalty(spec_.spline.functions, spec_.spline.penalty_order);
    const Eigen::Index b = base_size();
    for (std::size_t g = 0; g < groups; ++g) {
      const Eigen::MatrixXd& Z = state_.transforms.at(g);
      penalty_.block(static_cast<Eigen::Index>(g) * b, static_cast<Eigen::Index>(g) * b, b, b) =
          Z.transpose() * raw * Z;
    }
    penalty_ = (0.5 * (penalty_ + penalty_.transpose())).eval();
  }
}

namespace {

std::size_t count_groups(const std::vector<FactorLevels>& factors) {
  std::size_t n = 1;
  for (const auto& f : factors) n *= f.levels.size() - 1;
  return n;
}

long find_group(const std::vector<FactorLevels>& factors, const CovariateTable& x, std::size_t row) {
  long index = 0;
  bool reference = false;
  for (const auto& f : factors) {
    const std::string& v = x.categorical(f.name).at(row);
    auto it = std::find(f.levels.begin(), f.levels.end(), v);
    if (it == f.levels.end())
      throw Error(ErrorKind::unknown_level, "level '" + v + "' of '" + f.name + "' was not seen when fitting");
    const auto level = static_cast<std::size_t>(it - f.levels.begin());
    if (level == f.reference) {
      reference = true;
      continue;
    }
    const std::size_t rank = level < f.reference ? level : level - 1;
    index = index * static_cast<long>(f.levels.size() - 1) + static_cast<long>(rank);
  }
  return reference ? -1 : index;
}

std::string describe_group(const std::vector<FactorLevels>& factors, std::size_t group) {
  std::vector<std::string> parts(factors.size());
  for (std::size_t i = factors.size(); i-- > 0;) {
    const auto& f = factors[i];
    const std::size_t n = f.levels.size() - 1;
    std::size_t rank = group % n;
    group /= n;
    const std::size_t level = rank < f.reference ? rank : rank + 1;
    parts[i] = f.name + "=" + f.levels[level];
  }
  return join(parts, ",");
}

}  // namespace

std::size_t CovariateBasis::group_count() const {
  return uses_factors(spec_.kind) ? count_groups(state_.factors) : 1;
}

long CovariateBasis::group_of(const CovariateTable& x, std::size_t row) const {
  return uses_factors(spec_.kind) ? find_group(state_.factors, x, row) : 0;
}

std::string CovariateBasis::group_name(std::size_t group) const { return describe_group(state_.factors, group); }

Eigen::Index CovariateBasis::base_size() const {
  switch (base_kind(spec_)) {
    case TermKind::linear: return 1;
    case TermKind::smooth:
      return state_.transforms.empty() ? 0 : state_.transforms.front().cols();
    default: return 1;
  }
}

Eigen::VectorXd CovariateBasis::base_values(std::size_t group, double x) const {
  if (base_kind(spec_) == TermKind::linear) {
    Eigen::VectorXd v(1);
    v(0) = x - (state_.means.empty() ? 0.0 : state_.means.at(group));
    return v;
  }
  if (x < state_.range.lower || x > state_.range.upper)
    throw Error(ErrorKind::out_of_span, "covariate '" + spec_.covariate + "' value " + std::to_string(x) +
                                            " outside the fitted range of term '" + label_ + "'");
  return state_.transforms.at(group).transpose() * bspline_eval(state_.knots, spec_.spline.degree, x);
}

Eigen::MatrixXd CovariateBasis::evaluate(const CovariateTable& x) const {
  const auto rows = static_cast<Eigen::Index>(x.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, size_);
  if (spec_.kind == TermKind::intercept) {
    out.setOnes();
    return out;
  }
  const std::vector<double>* values = spec_.kind == TermKind::categorical ? nullptr : &x.numeric(spec_.covariate);
  const Eigen::Index b = base_size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const long g = group_of(x, static_cast<std::size_t>(i));
    if (g < 0) continue;
    if (spec_.kind == TermKind::categorical) {
      out(i, g) = 1.0;
    } else {
      out.row(i).segment(g * b, b) = base_values(static_cast<std::size_t>(g), (*values)[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

CovariateBasis CovariateBasis::compile(const TermSpec& spec, const CovariateTable& observed) {
  TermSpec s = spec;
  const std::string label = s.label.empty() ? default_label(s) : s.label;
  if (s.kind == TermKind::varying && s.base != TermKind::linear && s.base != TermKind::smooth)
    throw Error(ErrorKind::config, "varying term '" + label + "' needs a linear or smooth base");
  if (uses_factors(s.kind) && s.factors.empty())
    throw Error(ErrorKind::config, "term '" + label + "' names no categorical covariates");
  if (s.xi_x.value < 0.0 || s.xi_y.value < 0.0)
    throw Error(ErrorKind::negative_smoothing, "term '" + label + "' has a negative smoothing parameter");

  TermState st;
  if (uses_factors(s.kind)) {
    for (const auto& name : s.factors) {
      FactorLevels f;
      f.name = name;
      const auto& col = observed.categorical(name);
      if (auto it = s.levels.find(name); it != s.levels.end()) {
        f.levels = it->second;
      } else {
        std::set<std::string> uniq(col.begin(), col.end());
        f.levels.assign(uniq.begin(), uniq.end());
      }
      if (f.levels.size() < 2)
        throw Error(ErrorKind::degenerate_basis, "factor '" + name + "' needs at least two levels");
      if (auto it = s.reference.find(name); it != s.reference.end()) {
        auto pos = std::find(f.levels.begin(), f.levels.end(), it->second);
        if (pos == f.levels.end())
          throw Error(ErrorKind::unknown_level, "reference level '" + it->second + "' of '" + name + "' not present");
        f.reference = static_cast<std::size_t>(pos - f.levels.begin());
      }
      st.factors.push_back(std::move(f));
    }
  }

  const TermKind base = base_kind(s);
  if (base == TermKind::linear || base == TermKind::smooth) {
    const auto& x = observed.numeric(s.covariate);
    if (x.empty()) throw Error(ErrorKind::degenerate_basis, "no observations for term '" + label + "'");
    const bool grouped = uses_factors(s.kind);
    const std::size_t groups = grouped ? count_groups(st.factors) : 1;
    std::vector<std::vector<std::size_t>> members(groups);
    for (std::size_t i = 0; i < observed.rows(); ++i) {
      const long g = grouped ? find_group(st.factors, observed, i) : 0;
      if (g >= 0) members[static_cast<std::size_t>(g)].push_back(i);
    }
    for (std::size_t g = 0; g < groups; ++g)
      if (members[g].empty())
        throw Error(ErrorKind::degenerate_basis, "term '" + label + "' has no observations for group " +
                                                     describe_group(st.factors, g));

    if (base == TermKind::linear) {
      for (std::size_t g = 0; g < groups; ++g) {
        double m = 0.0;
        for (auto i : members[g]) m += x[i];
        st.means.push_back(s.center ? m / static_cast<double>(members[g].size()) : 0.0);
      }
    } else {
      if (s.spline.range) {
        st.range = *s.spline.range;
      } else {
        st.range = {*std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end())};
      }
      st.knots = clamped_knots(st.range.lower, st.range.upper, s.spline.functions, s.spline.degree);
      for (std::size_t g = 0; g < groups; ++g) {
        std::set<double> distinct;
        for (auto i : members[g]) distinct.insert(x[i]);
        if (static_cast<int>(distinct.size()) < s.spline.functions)
          throw Error(ErrorKind::degenerate_basis,
                      "smooth term '" + label + "' has " + std::to_string(distinct.size()) +
                          " distinct covariate values but " + std::to_string(s.spline.functions) +
                          " basis functions; the covariate design would be rank deficient");
        if (s.center) {
          Eigen::VectorXd c = Eigen::VectorXd::Zero(s.spline.functions);
          for (auto i : members[g]) {
            if (x[i] < st.range.lower || x[i] > st.range.upper)
              throw Error(ErrorKind::out_of_span, "covariate value outside the spline range of '" + label + "'");
            c += bspline_eval(st.knots, s.spline.degree, x[i]);
          }
          st.transforms.push_back(constraint_null_space(c));
        } else {
          st.transforms.push_back(Eigen::MatrixXd::Identity(s.spline.functions, s.spline.functions));
        }
      }
    }
  }
  CovariateBasis out(s, st);
  if (uses_factors(s.kind)) out.evaluate(observed);  // surfaces unknown levels early
  return out;
}

Model::Model(ModelSpec spec, std::vector<CovariateBasis> terms) : spec_(std::move(spec)), terms_(std::move(terms)) {
  if (terms_.empty()) throw Error(ErrorKind::config, "model has no terms");
  auto domain = make_domain(spec_.interval, spec_.atoms, spec_.quadrature_nodes);
  response_ = std::make_shared<const ResponseBasis>(domain, spec_.basis);
  offsets_.push_back(0);
  for (const auto& t : terms_) offsets_.push_back(offsets_.back() + t.size());
  std::set<std::string> labels;
  for (const auto& t : terms_)
    if (!labels.insert(t.label()).second) throw Error(ErrorKind::config, "duplicate term label '" + t.label() + "'");
}

Model Model::compile(const ModelSpec& spec, const CovariateTable& observed) {
  std::vector<CovariateBasis> terms;
  for (const auto& t : spec.terms) terms.push_back(CovariateBasis::compile(t, observed));
  return Model(spec, std::move(terms));
}

std::size_t Model::term_index(const std::string& label) const {
  for (std::size_t j = 0; j < terms_.size(); ++j)
    if (terms_[j].label() == label) return j;
  throw Error(ErrorKind::missing_term, "model has no term '" + label + "'");
}

Eigen::MatrixXd Model::design(const CovariateTable& x) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.rows()), covariate_size());
  for (std::size_t j = 0; j < terms_.size(); ++j) out.middleCols(offsets_[j], terms_[j].size()) = terms_[j].evaluate(x);
  return out;
}

Eigen::MatrixXd Model::penalty(const Smoothing& smoothing) const {
  if (smoothing.size() != terms_.size())
    throw Error(ErrorKind::invalid_argument, "one smoothing entry per term required");
  const Eigen::Index K = coefficient_size(), ky = response_size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(K, K);
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Eigen::Index o = offsets_[j] * ky, n = terms_[j].size() * ky;
    P.block(o, o, n, n) = penalty_block(smoothing[j].xi_x, smoothing[j].xi_y, terms_[j].penalty(), response_->penalty());
  }
  return P;
}

Smoothing Model::default_smoothing() const {
  Smoothing s;
  for (const auto& t : terms_) s.push_back({t.has_x_penalty() ? t.spec().xi_x.value : 0.0, t.spec().xi_y.value});
  return s;
}

std::vector<SmoothingDirection> Model::automatic_directions() const {
  std::vector<SmoothingDirection> out;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    if (terms_[j].has_x_penalty() && terms_[j].spec().xi_x.automatic) out.push_back({j, true});
    if (terms_[j].spec().xi_y.automatic) out.push_back({j, false});
  }
  return out;
}

std::vector<std::string> Model::numeric_covariates() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) {
    const auto k = t.spec().kind;
    if ((k == TermKind::linear || k == TermKind::smooth || k == TermKind::varying) &&
        std::find(out.begin(), out.end(), t.spec().covariate) == out.end())
      out.push_back(t.spec().covariate);
  }
  return out;
}

std::vector<std::string> Model::categorical_covariates() const {
  std::vector<std::string> out;
  for (const auto& t : terms_)
    for (const auto& f : t.spec().factors)
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  return out;
}

RankReport check_rank_conditions(const Eigen::MatrixXd& covariate_design,
                                 const std::vector<Eigen::MatrixXd>& response_designs) {
  RankReport r;
  r.covariate_size = covariate_design.cols();
  r.covariate_rank = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(covariate_design).rank();
  for (std::size_t l = 0; l < response_designs.size(); ++l) {
    const auto& B = response_designs[l];
    r.response_size = B.cols();
    Eigen::MatrixXd aug(B.rows(), B.cols() + 1);
    aug << B, Eigen::VectorXd::Ones(B.rows());
    const Eigen::Index rank = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(aug).rank();
    r.combo_ranks.push_back(rank);
    if (rank < B.cols() + 1) r.deficient_combos.push_back(l);
  }
  return r;
}

}  // namespace densreg
