#include "narvis/error.hpp"

namespace narvis {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::NotSvg: return "NotSvg";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::NotSiblings: return "NotSiblings";
    case ErrorCode::NestedSelection: return "NestedSelection";
    case ErrorCode::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::CycleIntroduced: return "CycleIntroduced";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::SelfRelation: return "SelfRelation";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::DependencyViolation: return "DependencyViolation";
    case ErrorCode::MissingPlan: return "MissingPlan";
    case ErrorCode::UnknownSlide: return "UnknownSlide";
    case ErrorCode::UnknownStep: return "UnknownStep";
    case ErrorCode::TargetOutsideUnit: return "TargetOutsideUnit";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DanglingPrimitiveRef: return "DanglingPrimitiveRef";
    case ErrorCode::MorphIncompatible: return "MorphIncompatible";
    case ErrorCode::UnknownDeck: return "UnknownDeck";
    case ErrorCode::UnknownProject: return "UnknownProject";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace narvis
