#include "densreg/covariates.hpp"

#include <sstream>

#include "densreg/error.hpp"

namespace densreg {

void CovariateTable::check_rows(std::size_t n, const std::string& name) {
  if (has(name)) throw Error(ErrorKind::invalid_argument, "duplicate covariate column '" + name + "'");
  if (!names_.empty() && n != rows_)
    throw Error(ErrorKind::invalid_argument, "covariate column '" + name + "' has a different row count");
  rows_ = n;
}

void CovariateTable::add_numeric(const std::string& name, std::vector<double> values) {
  check_rows(values.size(), name);
  names_.push_back(name);
  columns_.emplace_back(std::move(values));
}

void CovariateTable::add_categorical(const std::string& name, std::vector<std::string> values) {
  check_rows(values.size(), name);
  names_.push_back(name);
  columns_.emplace_back(std::move(values));
}

bool CovariateTable::has(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::size_t CovariateTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw Error(ErrorKind::config, "missing covariate column '" + name + "'");
}

bool CovariateTable::is_categorical(const std::string& name) const {
  return std::holds_alternative<std::vector<std::string>>(columns_[index_of(name)]);
}

const std::vector<double>& CovariateTable::numeric(const std::string& name) const {
  const auto& c = columns_[index_of(name)];
  if (!std::holds_alternative<std::vector<double>>(c))
    throw Error(ErrorKind::config, "covariate '" + name + "' is categorical, expected numeric");
  return std::get<std::vector<double>>(c);
}

const std::vector<std::string>& CovariateTable::categorical(const std::string& name) const {
  const auto& c = columns_[index_of(name)];
  if (!std::holds_alternative<std::vector<std::string>>(c))
    throw Error(ErrorKind::config, "covariate '" + name + "' is numeric, expected categorical");
  return std::get<std::vector<std::string>>(c);
}

CovariateTable CovariateTable::select_rows(const std::vector<std::size_t>& indices) const {
  CovariateTable out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::visit(
        [&](const auto& values) {
          std::decay_t<decltype(values)> picked;
          picked.reserve(indices.size());
          for (auto i : indices) picked.push_back(values.at(i));
          out.names_.push_back(names_[c]);
          out.columns_.emplace_back(std::move(picked));
        },
        columns_[c]);
  }
  out.rows_ = indices.size();
  return out;
}

CovariateTable CovariateTable::with_numeric_value(const std::string& name, double value) const {
  CovariateTable out = *this;
  auto& c = out.columns_[index_of(name)];
  if (!std::holds_alternative<std::vector<double>>(c))
    throw Error(ErrorKind::config, "covariate '" + name + "' is categorical, expected numeric");
  for (auto& v : std::get<std::vector<double>>(c)) v = value;
  return out;
}

std::string CovariateTable::describe_row(std::size_t index) const {
  std::ostringstream os;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    if (c) os << ' ';
    os << names_[c] << '=';
    std::visit([&](const auto& values) { os << values.at(index); }, columns_[c]);
  }
  return os.str();
}

}  // namespace densreg
