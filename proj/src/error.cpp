#include "neganchor/error.hpp"

#include <algorithm>
#include <cctype>

namespace neganchor {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::CorruptLine: return "CorruptLine";
    case ErrorKind::PositiveStoreEmpty: return "PositiveStoreEmpty";
    case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorKind::StrategyInvalid: return "StrategyInvalid";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::Transport: return "Transport";
    case ErrorKind::AuthMissing: return "AuthMissing";
    case ErrorKind::NoAnswerFound: return "NoAnswerFound";
    case ErrorKind::FamilyMismatch: return "FamilyMismatch";
    case ErrorKind::ParameterInvalid: return "ParameterInvalid";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

ErrorKind error_kind_from_string(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string wanted = lower(name);
  for (int i = 0; i <= static_cast<int>(ErrorKind::Io); ++i) {
    const auto kind = static_cast<ErrorKind>(i);
    if (lower(to_string(kind)) == wanted) return kind;
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown error kind '" + std::string(name) + "'");
}

}  // namespace neganchor
