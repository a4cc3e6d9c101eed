#pragma once

#include <stdexcept>
#include <string>

namespace gtp {

/// Raised when an operation receives arguments that violate its contract
/// (shape mismatch, malformed annotation, empty mask, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised while loading or validating on-disk data. Carries the offending
/// sample id when one is known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& sample_id, const std::string& what)
      : std::runtime_error(sample_id.empty() ? what : "sample '" + sample_id + "': " + what),
        sample_id_(sample_id) {}

  const std::string& sample_id() const noexcept { return sample_id_; }

 private:
  std::string sample_id_;
};

/// A forward value or loss became non-finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& op, const std::string& what)
      : std::runtime_error("non-finite value in '" + op + "': " + what), op_(op) {}

  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

}  // namespace gtp
