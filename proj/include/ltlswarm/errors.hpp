#pragma once
//
// Exception taxonomy shared across the library.  Each class maps onto one
// failure category the command-line driver reports with a distinct exit
// code: input/validation problems (1), plan synthesis failures (2), and
// runtime failures of the protocol or the integrator (3).
//

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltlswarm {

// Malformed formula text.  Carries the byte offset of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

// A scenario violates a structural rule: bad geometry or timing parameters,
// label collisions, disconnected initial placement, malformed file, ...
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// No satisfying plan exists for an agent's task over its feasible letters,
// or the formula is too large to translate.
class SynthesisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The coordination state machine received a message that must not occur
// under the synchronous-broadcast model (unknown sender, vote outside an
// election round, ...).
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The integrator could not keep an existing link inside its safe band even
// at the minimum sub-step, or a control evaluation left its domain.
class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ltlswarm
