#pragma once

#include <stdexcept>
#include <string>

namespace perfreg {

// Error taxonomy shared across the library. The CLI maps these onto its
// exit codes: contract/data/degenerate -> 2, internal -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (sizes, ranges, empty input).
struct ContractError : Error {
  using Error::Error;
};

// External data is malformed or inconsistent: parse failures, duplicate
// keys, unknown catalog entries, join mismatches.
struct DataError : Error {
  using Error::Error;
};

// The input is numerically degenerate for the requested statistic, e.g.
// coincident sample points, single-label level splits, singular designs.
struct DegenerateInputError : Error {
  using Error::Error;
};

// An internal invariant failed; indicates a bug rather than bad input.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace perfreg
