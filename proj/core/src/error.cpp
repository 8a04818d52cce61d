#include "pqpf/error.hpp"

namespace pqpf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NonpositiveMean: return "NonpositiveMean";
    case ErrorKind::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorKind::Numerical: return "NumericalError";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoTrainingData: return "NoTrainingData";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::DegenerateOccurrence: return "DegenerateOccurrence";
    case ErrorKind::RangeUnidentifiable: return "RangeUnidentifiable";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::NoData: return "NoData";
    case ErrorKind::NotFound: return "NotFound";
  }
  return "Error";
}

}  // namespace pqpf
