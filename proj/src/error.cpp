#include "densreg/error.hpp"

namespace densreg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::non_positive_density: return "NonPositiveDensity";
    case ErrorKind::domain_mismatch: return "DomainMismatch";
    case ErrorKind::out_of_span: return "OutOfSpan";
    case ErrorKind::degenerate_basis: return "DegenerateBasis";
    case ErrorKind::weight_mismatch: return "WeightMismatch";
    case ErrorKind::unknown_level: return "UnknownLevel";
    case ErrorKind::negative_smoothing: return "NegativeSmoothing";
    case ErrorKind::observation_outside_domain: return "ObservationOutsideDomain";
    case ErrorKind::non_positive_weight: return "NonPositiveWeight";
    case ErrorKind::not_a_partition: return "NotAPartition";
    case ErrorKind::empty_combo: return "EmptyCombo";
    case ErrorKind::max_iterations_exceeded: return "MaxIterationsExceeded";
    case ErrorKind::singular_hessian: return "SingularHessian";
    case ErrorKind::singular_covariance: return "SingularCovariance";
    case ErrorKind::out_of_domain: return "OutOfDomain";
    case ErrorKind::missing_term: return "MissingTerm";
    case ErrorKind::zero_truth_norm: return "ZeroTruthNorm";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::parse: return "ParseError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace densreg
