#pragma once

#include <stdexcept>
#include <string>

namespace astcrf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed AST, edit-script, dataset or model document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An edit operation cannot be applied to the current tree.
class EditError : public Error {
 public:
  using Error::Error;
};

/// Two transform rules claim the same node with different names.
class ExtractionConflict : public Error {
 public:
  ExtractionConflict(int position, std::string first, std::string second)
      : Error("extraction conflict at position " + std::to_string(position) +
              ": " + first + " vs " + second),
        position_(position),
        first_(std::move(first)),
        second_(std::move(second)) {}

  int position() const noexcept { return position_; }
  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  int position_;
  std::string first_;
  std::string second_;
};

/// No admissible assignment, or an instance too large for exhaustive search.
class InferenceError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace astcrf
