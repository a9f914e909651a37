#include "neganchor/prompt_format.hpp"

#include "neganchor/embedding.hpp"

namespace neganchor {

std::string render_demonstration(std::string_view question, std::string_view rationale,
                                 std::string_view answer) {
  std::string out = "Q: ";
  out += question;
  out += "\nA:";
  const std::string_view body = trim(rationale);
  if (!body.empty()) {
    out += ' ';
    out += body;
  }
  if (!answer.empty()) {
    out += " The answer is ";
    out += answer;
    out += '.';
  }
  out += "\n\n";
  return out;
}

std::string render_query(std::string_view query) {
  std::string out = "Q: ";
  out += query;
  out += "\nA: ";
  out += kCotTrigger;
  return out;
}

}  // namespace neganchor
