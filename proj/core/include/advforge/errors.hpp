#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace advforge {

// Error taxonomy. The CLI maps these onto exit codes: ConfigError -> 2,
// data/generation errors -> 3, numerical errors -> 4.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- numerical ---------------------------------------------------------------

/// Series is constant (max == min); the [0,1] normalization is undefined.
struct DegenerateSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Value outside the mathematical domain of an operation (arccos, diagonal inversion).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Trend segment has zero mean bar range; the slope ratio is undefined.
struct DegenerateWindow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// More than one pattern predicate matched; diagnostic for defective RuleParams.
struct AmbiguousMatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A forward-pass intermediate became NaN or infinite.
struct NonFiniteActivation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Paired t-test differences are all identical; t is undefined.
struct ZeroVariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- data / generation -------------------------------------------------------

/// Rejection sampling exceeded its attempt cap; RuleParams are inconsistent
/// with the generator's construction.
struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t row_, std::size_t column_, const std::string& reason)
      : std::runtime_error("row " + std::to_string(row_) + ", column " +
                           std::to_string(column_) + ": " + reason),
        row(row_),
        column(column_) {}
  std::size_t row;
  std::size_t column;
};

struct InvariantError : std::runtime_error {
  InvariantError(std::size_t row_, const std::string& reason)
      : std::runtime_error("row " + std::to_string(row_) + ": " + reason), row(row_) {}
  explicit InvariantError(const std::string& reason)
      : std::runtime_error(reason), row(0) {}
  std::size_t row;  // 0 when not tied to a file row
};

/// Training dataset is missing one of the eight classes.
struct EmptyClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adversarial pool too small for the stratified merge draw.
struct InsufficientAdversarial : std::runtime_error {
  InsufficientAdversarial(int label_, std::size_t needed_, std::size_t available_)
      : std::runtime_error("class " + std::to_string(label_) + ": need " +
                           std::to_string(needed_) + " adversarial items, have " +
                           std::to_string(available_)),
        label(label_),
        needed(needed_),
        available(available_) {}
  int label;
  std::size_t needed;
  std::size_t available;
};

}  // namespace advforge
