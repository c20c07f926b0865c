#pragma once

#include <stdexcept>
#include <string>

namespace spellkit {

/// A series or iteration hit its term/iteration cap before reaching the
/// requested tolerance. Carries the partial result and the certified
/// bound on what is missing.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double partial_sum, double tail_bound)
      : std::runtime_error(what), partial_sum_(partial_sum), tail_bound_(tail_bound) {}

  double partial_sum() const { return partial_sum_; }
  double tail_bound() const { return tail_bound_; }

 private:
  double partial_sum_;
  double tail_bound_;
};

/// Nested fits whose log-likelihoods are ordered the wrong way by more
/// than numerical slack; signals an optimizer failure upstream.
class InconsistentFitsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace spellkit
