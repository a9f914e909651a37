#ifndef NEGANCHOR_PROMPT_FORMAT_HPP
#define NEGANCHOR_PROMPT_FORMAT_HPP

#include <string>
#include <string_view>

namespace neganchor {

/// Zero-Shot-CoT trigger appended after every query.
inline constexpr std::string_view kCotTrigger = "Let's think step by step.";

/// Contrastive few-shot instruction; the bracketed slots are replaced by the
/// rendered exemplar blocks.
inline constexpr std::string_view kContrastiveTemplate =
    "Below is a positive example and a negative example. Learn from the positive example and "
    "avoid making the mistakes in the negative example. Here is the positive example: "
    "[positive example], And here is the negative example: [negative example]";
inline constexpr std::string_view kPositiveSlot = "[positive example]";
inline constexpr std::string_view kNegativeSlot = "[negative example]";

/// "Q: {question}\nA: {rationale} The answer is {answer}.\n\n"; an empty
/// rationale collapses to "A: The answer is {answer}." and an empty answer
/// drops the answer sentence.
std::string render_demonstration(std::string_view question, std::string_view rationale,
                                 std::string_view answer);

/// "Q: {query}\nA: Let's think step by step."
std::string render_query(std::string_view query);

}  // namespace neganchor

#endif  // NEGANCHOR_PROMPT_FORMAT_HPP
