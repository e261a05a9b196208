#pragma once

// Command-line front end. run_cli is the whole program minus process setup,
// so tests can drive it with in-memory streams.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "invcarson/inverse.hpp"

namespace invcarson::cli {

/// One row of a reference file:
///   line_id,kind,r00,x00,r11,x11[,b00,b11][,temp_known,buried,n_cond]
/// Empty cells mean missing. temp_known holds the known temperature [degC].
struct ReferenceRecord {
  std::string line_id;
  SequenceReference ref;
  std::optional<double> temperature;
  std::optional<bool> buried;
  std::optional<int> n_cond;
};

/// A parsed row or the reason it could not be parsed.
struct ParsedRecord {
  std::string line_id;
  std::optional<ReferenceRecord> record;
  std::string error;
};

/// Throws Schema when the header lacks a required column.
std::vector<ParsedRecord> parse_reference_csv(std::istream& in);

/// Returns the process exit code: 0 on success (per-record failures are
/// reported in the output), 1 on usage errors, 2 on fatal errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace invcarson::cli
