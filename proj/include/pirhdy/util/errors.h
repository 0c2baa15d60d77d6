#pragma once

#include <stdexcept>
#include <string>

namespace pirhdy {

enum class ErrorCode {
  // midi ingestion
  MalformedHeader,
  UnsupportedFormat,
  TruncatedChunk,
  EmptySong,
  // tokenization
  EmptyCorpus,
  SongRejected,
  // nn engine
  IndexOutOfRange,
  OddDimension,
  ShapeMismatch,
  EmptySequence,
  NonFiniteGradient,
  // training
  EmptyBatch,
  DivergedLoss,
  EmptyContext,
  EmptyPhrase,
  EmptyInput,
  NotPretrained,
  EmptyPairs,
  // evaluation
  NotTrained,
  EmptyInstances,
  InsufficientPhrases,
  // io
  BadFile,
  BadConfig,
};

const char* errorCodeName(ErrorCode code);

/// Exception carrying a stable error code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pirhdy
