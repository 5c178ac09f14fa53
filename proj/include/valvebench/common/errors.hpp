#pragma once

#include <stdexcept>
#include <string>

namespace valvebench {

/// Caller broke a documented precondition (dimension mismatch, step after done, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A NaN or infinity reached a place where only finite values are allowed.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant that should be unreachable was observed.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file (config, checkpoint, fault script).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hardware layer gave up and needs an operator. Training checkpoints and stops.
class HardwareEscalation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace valvebench
