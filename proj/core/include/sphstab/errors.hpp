#pragma once

#include <stdexcept>
#include <string>

namespace sphstab {

// Error taxonomy; the CLI maps these to exit codes (domain -> 2,
// non-convergence -> 3, I/O -> 4).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class CapacityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sphstab
