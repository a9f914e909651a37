#include "neganchor/answer_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "neganchor/error.hpp"

namespace neganchor {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

// Scans one number token starting at `i`; returns the canonical text and
// advances `i` past the token, or returns empty and leaves `i` alone.
std::string scan_number(std::string_view text, std::size_t& i) {
  std::size_t p = i;
  bool negative = false;
  if (p < text.size() && (text[p] == '-' || text[p] == '+')) {
    const bool prev_ok = p == 0 || !(is_alnum(text[p - 1]) || text[p - 1] == ')');
    if (!prev_ok) return {};
    negative = text[p] == '-';
    ++p;
  }
  if (p < text.size() && text[p] == '$') ++p;
  if (p >= text.size() || !is_digit(text[p])) return {};
  if (p == i && i > 0 && is_digit(text[i - 1])) return {};

  std::string digits;
  while (p < text.size() && is_digit(text[p])) digits.push_back(text[p++]);
  // Thousands groups: a comma followed by exactly three digits.
  while (p + 3 < text.size() && text[p] == ',' && is_digit(text[p + 1]) &&
         is_digit(text[p + 2]) && is_digit(text[p + 3]) &&
         !(p + 4 < text.size() && is_digit(text[p + 4]))) {
    digits.append(text.substr(p + 1, 3));
    p += 4;
  }
  std::string fraction;
  if (p + 1 < text.size() && text[p] == '.' && is_digit(text[p + 1])) {
    ++p;
    while (p < text.size() && is_digit(text[p])) fraction.push_back(text[p++]);
  }
  if (p < text.size() && text[p] == '%') ++p;

  i = p;
  std::string out = negative ? "-" : "";
  out += digits;
  if (!fraction.empty()) out += "." + fraction;
  return out;
}

std::optional<std::string> extract_numeric(std::string_view text) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t at = i;
    std::string token = scan_number(text, at);
    if (!token.empty()) {
      last = std::move(token);
      i = at;
    } else {
      ++i;
    }
  }
  return last;
}

bool is_choice(char c, std::string_view letters) {
  return letters.find(c) != std::string_view::npos;
}

// Letter at position i counts when it is a choice letter standing alone.
bool standalone_letter(std::string_view text, std::size_t i, std::string_view letters) {
  const char c = text[i];
  const bool prev_free = i == 0 || !is_alnum(text[i - 1]);
  const bool next_free = i + 1 >= text.size() || !is_alnum(text[i + 1]);
  if (!prev_free || !next_free) return false;
  if (is_choice(c, letters)) return true;
  const bool parenthesized = i > 0 && text[i - 1] == '(' && i + 1 < text.size() && text[i + 1] == ')';
  return parenthesized && is_alpha(c) && is_choice(to_upper(c), letters);
}

std::optional<std::string> extract_choice(std::string_view text, std::string_view letters) {
  const std::string lowered = lower(text);
  const auto cue = lowered.rfind("answer is");
  if (cue != std::string::npos) {
    for (std::size_t i = cue + 9; i < text.size(); ++i) {
      if (standalone_letter(text, i, letters)) return std::string(1, to_upper(text[i]));
    }
  }
  for (std::size_t i = text.size(); i-- > 0;) {
    if (standalone_letter(text, i, letters)) return std::string(1, to_upper(text[i]));
  }
  return std::nullopt;
}

std::optional<std::string> extract_yes_no(std::string_view text) {
  const std::string lowered = lower(text);
  std::optional<std::string> last;
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    if (i > 0 && is_alnum(lowered[i - 1])) continue;
    for (std::string_view word : {std::string_view("yes"), std::string_view("no")}) {
      if (lowered.compare(i, word.size(), word) != 0) continue;
      const std::size_t end = i + word.size();
      if (end < lowered.size() && is_alnum(lowered[end])) continue;
      last = std::string(word);
    }
  }
  return last;
}

// Lowercase, drop all whitespace, strip non-alphanumerics at both ends.
std::string canonical_string(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!is_space(c)) out.push_back(to_lower(c));
  std::size_t b = 0;
  while (b < out.size() && !is_alnum(out[b])) ++b;
  std::size_t e = out.size();
  while (e > b && !is_alnum(out[e - 1])) --e;
  return out.substr(b, e - b);
}

std::optional<std::string> extract_string(std::string_view text) {
  const auto close = text.rfind('"');
  if (close != std::string_view::npos && close > 0) {
    const auto open = text.rfind('"', close - 1);
    if (open != std::string_view::npos) {
      std::string value = canonical_string(text.substr(open + 1, close - open - 1));
      if (!value.empty()) return value;
    }
  }
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    std::string value = canonical_string(*it);
    if (!value.empty()) return value;
  }
  return std::nullopt;
}

struct Decimal {
  bool negative = false;
  std::string integer;  // no leading zeros, "0" for zero
  bool has_fraction = false;
};

Decimal parse_decimal(std::string_view s) {
  Decimal d;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) d.negative = s[i++] == '-';
  std::size_t start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  std::string_view int_part = s.substr(start, i - start);
  while (int_part.size() > 1 && int_part.front() == '0') int_part.remove_prefix(1);
  d.integer = int_part.empty() ? "0" : std::string(int_part);
  d.has_fraction = i < s.size() && s[i] == '.';
  if (d.integer == "0") d.negative = false;
  return d;
}

}  // namespace

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Numeric: return "numeric";
    case FamilyKind::MultipleChoice: return "multiple_choice";
    case FamilyKind::YesNo: return "yes_no";
    case FamilyKind::StringExact: return "string_exact";
  }
  return "numeric";
}

FamilyKind family_kind_from_string(std::string_view name) {
  if (name == "numeric") return FamilyKind::Numeric;
  if (name == "multiple_choice") return FamilyKind::MultipleChoice;
  if (name == "yes_no") return FamilyKind::YesNo;
  if (name == "string_exact") return FamilyKind::StringExact;
  throw Error(ErrorKind::ConfigInvalid, "unknown task family '" + std::string(name) + "'");
}

TaskFamily TaskFamily::multiple_choice(std::string letters) {
  std::transform(letters.begin(), letters.end(), letters.begin(), to_upper);
  if (letters.empty()) {
    throw Error(ErrorKind::ParameterInvalid, "multiple_choice needs choice letters");
  }
  return {FamilyKind::MultipleChoice, std::move(letters)};
}

std::optional<NormalizedAnswer> try_extract(std::string_view raw, const TaskFamily& family) {
  std::optional<std::string> value;
  switch (family.kind) {
    case FamilyKind::Numeric: value = extract_numeric(raw); break;
    case FamilyKind::MultipleChoice: value = extract_choice(raw, family.choice_letters); break;
    case FamilyKind::YesNo: value = extract_yes_no(raw); break;
    case FamilyKind::StringExact: value = extract_string(raw); break;
  }
  if (!value) return std::nullopt;
  return NormalizedAnswer{std::move(*value), family};
}

NormalizedAnswer extract(std::string_view raw, const TaskFamily& family) {
  auto answer = try_extract(raw, family);
  if (!answer) {
    throw Error(ErrorKind::NoAnswerFound,
                "no " + std::string(to_string(family.kind)) + " answer in model output");
  }
  return std::move(*answer);
}

bool is_correct(const NormalizedAnswer& predicted, const NormalizedAnswer& gold) {
  if (predicted.family.kind != gold.family.kind) {
    throw Error(ErrorKind::FamilyMismatch, "comparing " + std::string(to_string(predicted.family.kind)) +
                                               " with " + std::string(to_string(gold.family.kind)));
  }
  if (predicted.family.kind != FamilyKind::Numeric) return predicted.value == gold.value;

  const Decimal a = parse_decimal(predicted.value);
  const Decimal b = parse_decimal(gold.value);
  if (!a.has_fraction && !b.has_fraction) {
    return a.negative == b.negative && a.integer == b.integer;
  }
  try {
    return std::fabs(std::stod(predicted.value) - std::stod(gold.value)) <= 1e-6;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace neganchor
