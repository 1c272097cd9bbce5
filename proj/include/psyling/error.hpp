#pragma once

#include <stdexcept>
#include <string>

namespace psyling {

/// Coarse error category. The CLI maps these onto its exit codes.
enum class ErrorCategory { Config, Data, Training };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), category_(category), kind_(std::move(kind)) {}

  ErrorCategory category() const noexcept { return category_; }
  /// Short machine-readable name, e.g. "HashMismatch".
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCategory category_;
  std::string kind_;
};

#define PSYLING_DEFINE_ERROR(Name, Category)                                 \
  class Name : public ::psyling::Error {                                     \
   public:                                                                   \
    explicit Name(const std::string& what)                                   \
        : ::psyling::Error(::psyling::ErrorCategory::Category, #Name, what) {} \
  };

PSYLING_DEFINE_ERROR(ConfigError, Config)

// corpus
PSYLING_DEFINE_ERROR(UnknownLabel, Data)
PSYLING_DEFINE_ERROR(ParseLeafMismatch, Data)
PSYLING_DEFINE_ERROR(ClassTooSmall, Data)

// featx
PSYLING_DEFINE_ERROR(MissingResource, Data)
PSYLING_DEFINE_ERROR(HashMismatch, Data)
PSYLING_DEFINE_ERROR(MalformedLexicon, Data)
PSYLING_DEFINE_ERROR(MalformedFeatureFile, Data)

// embedio
PSYLING_DEFINE_ERROR(BadMagic, Data)
PSYLING_DEFINE_ERROR(DimMismatch, Data)
PSYLING_DEFINE_ERROR(DuplicatePost, Data)
PSYLING_DEFINE_ERROR(MissingEmbedding, Data)

// neural / models
PSYLING_DEFINE_ERROR(ShapeMismatch, Training)
PSYLING_DEFINE_ERROR(ArchitectureMismatch, Data)
PSYLING_DEFINE_ERROR(DivergedLoss, Training)
PSYLING_DEFINE_ERROR(EmptySplit, Training)
PSYLING_DEFINE_ERROR(MalformedCheckpoint, Data)

// stacking
PSYLING_DEFINE_ERROR(NotConverged, Training)
PSYLING_DEFINE_ERROR(MissingCheckpoint, Data)
PSYLING_DEFINE_ERROR(IncompleteCoverage, Data)

// eval
PSYLING_DEFINE_ERROR(LengthMismatch, Data)
PSYLING_DEFINE_ERROR(InconsistentClassSets, Data)

// pipeline: a command ran before the one that produces its inputs
PSYLING_DEFINE_ERROR(MissingArtifact, Data)

#undef PSYLING_DEFINE_ERROR

/// Schema violation in a line-oriented input file; carries the 1-based line number.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : Error(ErrorCategory::Data, "MalformedRecord",
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace psyling
