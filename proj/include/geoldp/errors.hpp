#pragma once

#include <stdexcept>
#include <string>

namespace geoldp {

// Invalid argument or precondition violation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Three points that are collinear within the geometric tolerance.
class DegenerateTriple : public DomainError {
 public:
  DegenerateTriple() : DomainError("degenerate (collinear) point triple") {}
};

// The regime n * r^d exceeds the configured sparsity guard.
class SparsityViolation : public DomainError {
 public:
  SparsityViolation(double sparsity, double guard)
      : DomainError("sparsity n*r^d = " + std::to_string(sparsity) +
                    " exceeds guard " + std::to_string(guard)),
        sparsity(sparsity),
        guard(guard) {}
  double sparsity;
  double guard;
};

// Newton iteration for the rate function did not converge; the point is
// outside the interior of the effective domain.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// exp(<a, v>) overflowed while evaluating the log-MGF.
class MgfOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// The dual Hessian is singular (score components are linearly dependent).
class SingularScore : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer usable points than a fit requires.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoldp
