#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace narvis {

enum class ErrorCode {
  // svg-ingest
  MalformedXml,
  NotSvg,
  EmptyScene,
  UnsupportedGeometry,
  // component-tree
  EmptyInput,
  UnknownNode,
  InvalidPartition,
  NotSiblings,
  NestedSelection,
  // channel-analysis
  UnknownPrimitive,
  InvalidPermutation,
  UnknownChannel,
  OutOfRange,
  // narrative-planner
  CycleIntroduced,
  UnknownUnit,
  SelfRelation,
  NotAPermutation,
  DependencyViolation,
  // deck-model
  MissingPlan,
  UnknownSlide,
  UnknownStep,
  TargetOutsideUnit,
  InvariantViolation,
  SchemaViolation,
  // compiler
  DanglingPrimitiveRef,
  MorphIncompatible,
  // analytics / service
  UnknownDeck,
  UnknownProject,
  VersionConflict,
  NotFound,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. `pointer` is a JSON pointer (or a
/// "line:column" position for XML input) when the error refers to a location;
/// `items` carries structured detail such as the unit ids along a cycle.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string pointer = {},
        std::vector<std::string> items = {})
      : std::runtime_error(message),
        code_(code),
        pointer_(std::move(pointer)),
        items_(std::move(items)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& pointer() const noexcept { return pointer_; }
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  ErrorCode code_;
  std::string pointer_;
  std::vector<std::string> items_;
};

}  // namespace narvis
