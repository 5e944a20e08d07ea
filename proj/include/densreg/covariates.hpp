#pragma once

#include <string>
#include <variant>
#include <vector>

namespace densreg {

/// Column-oriented table of numeric and categorical covariates.
class CovariateTable {
 public:
  using Column = std::variant<std::vector<double>, std::vector<std::string>>;

  void add_numeric(const std::string& name, std::vector<double> values);
  void add_categorical(const std::string& name, std::vector<std::string> values);

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool has(const std::string& name) const;
  bool is_categorical(const std::string& name) const;

  const std::vector<double>& numeric(const std::string& name) const;
  const std::vector<std::string>& categorical(const std::string& name) const;
  const Column& column(std::size_t index) const { return columns_[index]; }

  CovariateTable select_rows(const std::vector<std::size_t>& indices) const;
  CovariateTable row(std::size_t index) const { return select_rows({index}); }
  /// Copy with a numeric column overwritten by a constant.
  CovariateTable with_numeric_value(const std::string& name, double value) const;

  /// Human-readable "name=value" summary of one row.
  std::string describe_row(std::size_t index) const;

 private:
  std::size_t index_of(const std::string& name) const;
  void check_rows(std::size_t n, const std::string& name);

  std::vector<std::string> names_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

}  // namespace densreg
