#pragma once

#include <stdexcept>
#include <string>

namespace densreg {

enum class ErrorKind {
  invalid_argument,
  non_positive_density,
  domain_mismatch,
  out_of_span,
  degenerate_basis,
  weight_mismatch,
  unknown_level,
  negative_smoothing,
  observation_outside_domain,
  non_positive_weight,
  not_a_partition,
  empty_combo,
  max_iterations_exceeded,
  singular_hessian,
  singular_covariance,
  out_of_domain,
  missing_term,
  zero_truth_norm,
  config,
  parse,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace densreg
