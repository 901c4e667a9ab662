#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairfilter {

// Broad failure classes. The CLI maps each class onto a distinct exit code.
enum class ErrorKind {
  kParse,        // malformed input record
  kValidation,   // well-formed input that violates a contract
  kLabeling,     // entity cannot be aligned to the sentence
  kConflict,     // a token pair demanded both +1 and -1
  kShape,        // dimension mismatch between tensors
  kBounds,       // span outside the matrix
  kConfig,       // invalid or missing configuration
  kState,        // object used in the wrong lifecycle state
  kLength,       // sequence longer than the encoder accepts
  kGeneration,   // synthetic generator cannot satisfy the request
  kTraining,     // optimisation diverged
  kLookup,       // id missing from an index file
  kTransport,    // retryable client failure
  kClient,       // non-retryable client failure
  kPipeline,     // pipeline aborted after retries
  kIo,           // filesystem failure
};

std::string_view ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void Fail(ErrorKind kind, const std::string& message);

}  // namespace pairfilter
