#include "storynet/error.hpp"

namespace storynet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicatePosition: return "DuplicatePosition";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoiseClusterUnlabeled: return "NoiseClusterUnlabeled";
    case ErrorCode::EmptySeed: return "EmptySeed";
    case ErrorCode::UnknownEvent: return "UnknownEvent";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::TooFewClusters: return "TooFewClusters";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ConfigConflict: return "ConfigConflict";
  }
  return "Unknown";
}

}  // namespace storynet
