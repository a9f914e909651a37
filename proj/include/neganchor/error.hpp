#ifndef NEGANCHOR_ERROR_HPP
#define NEGANCHOR_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace neganchor {

enum class ErrorKind {
  EmptyText,
  ProviderUnavailable,
  DimMismatch,
  KTooLarge,
  SchemaMismatch,
  CorruptLine,
  PositiveStoreEmpty,
  InsufficientCorpus,
  StrategyInvalid,
  RateLimited,
  Transport,
  AuthMissing,
  NoAnswerFound,
  FamilyMismatch,
  ParameterInvalid,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Inverse of to_string, case-insensitive. Throws ConfigInvalid.
ErrorKind error_kind_from_string(std::string_view name);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace neganchor

#endif  // NEGANCHOR_ERROR_HPP
