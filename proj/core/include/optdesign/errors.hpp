#pragma once

#include <stdexcept>
#include <string>

namespace optdesign {

// Bad input to an operation: out-of-range indices, dimension mismatch,
// broken invariants in user-supplied data.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed design-space / part-worth / instance file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by query selectors when no candidate query is left to ask.
class CandidatesExhausted : public std::runtime_error {
 public:
  CandidatesExhausted() : std::runtime_error("no candidate queries remain") {}
};

}  // namespace optdesign
