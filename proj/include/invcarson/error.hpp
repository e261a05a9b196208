#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invcarson {

enum class ErrorKind {
  Schema,              // catalog / input file does not match the documented layout
  Validation,          // a type invariant is violated
  Domain,              // argument outside the mathematical domain of an operation
  Contract,            // caller broke an operation's precondition
  LogDomain,           // non-positive argument reaching a logarithm
  DegenerateGeometry,  // coincident conductors, singular potential matrix
  UnsupportedGeometry, // operation needs data the configuration does not carry
  SingularNeutral,     // Z_nn == 0 in Kron reduction
  ConductorTouchesGround,
  BoundViolation,
  InconsistentStarred,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Re-throws with a stage prefix, used by the forward pipeline.
  Error with_stage(std::string_view stage) const {
    return Error(kind_, std::string(stage) + ": " + what());
  }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace invcarson
