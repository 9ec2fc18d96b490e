#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cot {

enum class ErrorKind {
  kSchema,
  kCardinality,
  kParse,
  kSize,
  kUndefinedCorrelation,
  kProportion,
  kCandidate,
  kTraining,
  kShape,
  kGroupSupport,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with `context: `.
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

}  // namespace cot
