#ifndef NEGANCHOR_ANSWER_EXTRACTION_HPP
#define NEGANCHOR_ANSWER_EXTRACTION_HPP

#include <optional>
#include <string>
#include <string_view>

namespace neganchor {

enum class FamilyKind { Numeric, MultipleChoice, YesNo, StringExact };

std::string_view to_string(FamilyKind kind);
FamilyKind family_kind_from_string(std::string_view name);

struct TaskFamily {
  FamilyKind kind = FamilyKind::Numeric;
  /// Uppercase choice letters, e.g. "ABCDE"; non-empty iff kind is MultipleChoice.
  std::string choice_letters;

  static TaskFamily numeric() { return {FamilyKind::Numeric, {}}; }
  static TaskFamily yes_no() { return {FamilyKind::YesNo, {}}; }
  static TaskFamily string_exact() { return {FamilyKind::StringExact, {}}; }
  static TaskFamily multiple_choice(std::string letters = "ABCDE");

  bool operator==(const TaskFamily&) const = default;
};

struct NormalizedAnswer {
  std::string value;
  TaskFamily family;

  bool operator==(const NormalizedAnswer&) const = default;
};

// Answer cleaning rules ("last occurrence" throughout):
//   numeric         last number token (optional sign, "$", comma groups,
//                   decimals, "%"); "$", "%" and commas are stripped, as is a
//                   leading "+".
//   multiple_choice first standalone choice letter after the last
//                   "answer is", else the last standalone choice letter.
//                   Standalone = uppercase and not inside a word, or any case
//                   when wrapped in parentheses like "(b)".
//   yes_no          last whole word "yes"/"no", lowercased.
//   string_exact    contents of the last "..." pair, else the last
//                   whitespace token with surrounding punctuation stripped;
//                   lowercased and trimmed.

std::optional<NormalizedAnswer> try_extract(std::string_view raw, const TaskFamily& family);

/// As try_extract, throwing NoAnswerFound when nothing matches.
NormalizedAnswer extract(std::string_view raw, const TaskFamily& family);

/// Numeric: exact decimal equality, or |a-b| <= 1e-6 when either side has a
/// fractional part. Other families: canonical string equality.
/// Throws FamilyMismatch when the families differ.
bool is_correct(const NormalizedAnswer& predicted, const NormalizedAnswer& gold);

}  // namespace neganchor

#endif  // NEGANCHOR_ANSWER_EXTRACTION_HPP
