#include "verdict/prompts.hpp"

#include <cctype>

#include "verdict/errors.hpp"

namespace verdict {

const std::string_view kReasoningPromptTemplate =
    R"(Please act as an impartial judge and evaluate the quality of the responses provided by two AI assistants to the user question displayed below.

[User Question]
{PROMPT}

[The start of Answer #1]
{ANSWER1}
[The end of Answer #1]

[The start of Answer #2]
{ANSWER2}
[The end of Answer #2]

Your task is to determine which of the two answers is better, based on the following criteria:
- Choose the response that follows the user's instructions and answers the user's question better.
- Evaluate based on helpfulness, relevance, accuracy, depth, creativity, and level of detail of the responses.
- Do not allow the length or order of the responses to influence your evaluation.

In 1 paragraph, write out your thought process and reasoning for which answer better meets the criteria. Do not actually answer the original question yourself. You are only choosing between the two provided answers based on how well they meet the specified criteria. If both answers are comparable such that you have no preference, then explain that.)";

const std::string_view kPreferencePromptTemplate =
    R"(Read the following passage:

[Start of Passage]
{REASONING}
[End of Passage]

Indicate which answer the author thinks is better. Respond with a single integer:
- "1" if the author thinks Answer #1 is better.
- "2" if the author thinks Answer #2 is better.
- "0" if the author has no preference, or thinks the answers are equal.

Your response must be exactly one integer (1, 2, or 0). Do not include any other text/explanation. The author prefers Answer #:)";

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& subs) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = subs.find(name);
    if (it == subs.end())
      throw ValidationError("template placeholder has no substitution: {" +
                            name + "}");
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

std::string build_reasoning_prompt(const ContestRecord& contest,
                                   PresentationOrder order) {
  const std::string& first =
      order == PresentationOrder::AB ? contest.response_a : contest.response_b;
  const std::string& second =
      order == PresentationOrder::AB ? contest.response_b : contest.response_a;
  return render_template(kReasoningPromptTemplate,
                         {{"PROMPT", contest.prompt},
                          {"ANSWER1", first},
                          {"ANSWER2", second}});
}

std::string build_preference_prompt(const std::string& reasoning) {
  if (reasoning.empty())
    throw ValidationError("reasoning passage is empty");
  return render_template(kPreferencePromptTemplate, {{"REASONING", reasoning}});
}

ParseMode parse_mode_from_string(const std::string& s) {
  if (s == "strict") return ParseMode::Strict;
  if (s == "lenient") return ParseMode::Lenient;
  throw ConfigError("unknown parse mode: " + s + " (expected strict|lenient)");
}

std::string to_string(ParseMode mode) {
  return mode == ParseMode::Strict ? "strict" : "lenient";
}

namespace {

Choice choice_of_digit(char c) {
  switch (c) {
    case '1':
      return Choice::First;
    case '2':
      return Choice::Second;
    default:
      return Choice::Tie;
  }
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

Choice parse_preference(std::string_view raw, ParseMode mode) {
  std::size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string_view body = raw.substr(b, e - b);

  if (mode == ParseMode::Strict) {
    if (body.size() == 1 &&
        (body[0] == '0' || body[0] == '1' || body[0] == '2'))
      return choice_of_digit(body[0]);
    throw PreferenceParseError(
        "preference reply is not a bare 0/1/2", std::string(raw));
  }

  // Lenient: first 0/1/2 standing alone (not part of a longer token such
  // as "10" or "v2").
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '0' && c != '1' && c != '2') continue;
    bool left_ok = i == 0 || !is_word_char(body[i - 1]);
    bool right_ok = i + 1 == body.size() || !is_word_char(body[i + 1]);
    if (left_ok && right_ok) return choice_of_digit(c);
  }
  throw PreferenceParseError(
      "preference reply contains no standalone 0/1/2", std::string(raw));
}

}  // namespace verdict
