#include "pirhdy/util/errors.h"

namespace pirhdy {

const char* errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedChunk: return "TruncatedChunk";
    case ErrorCode::EmptySong: return "EmptySong";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::SongRejected: return "SongRejected";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::EmptyPhrase: return "EmptyPhrase";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotPretrained: return "NotPretrained";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::NotTrained: return "NotTrained";
    case ErrorCode::EmptyInstances: return "EmptyInstances";
    case ErrorCode::InsufficientPhrases: return "InsufficientPhrases";
    case ErrorCode::BadFile: return "BadFile";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace pirhdy
