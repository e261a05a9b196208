#include "invcarson/error.hpp"

namespace invcarson {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Schema: return "schema";
  case ErrorKind::Validation: return "validation";
  case ErrorKind::Domain: return "domain";
  case ErrorKind::Contract: return "contract";
  case ErrorKind::LogDomain: return "log-domain";
  case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
  case ErrorKind::UnsupportedGeometry: return "unsupported-geometry";
  case ErrorKind::SingularNeutral: return "singular-neutral";
  case ErrorKind::ConductorTouchesGround: return "conductor-touches-ground";
  case ErrorKind::BoundViolation: return "bound-violation";
  case ErrorKind::InconsistentStarred: return "inconsistent-starred-values";
  }
  return "unknown";
}

} // namespace invcarson
