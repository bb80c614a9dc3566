#pragma once

#include <map>
#include <string>
#include <string_view>

#include "verdict/types.hpp"

namespace verdict {

// Stage-1 template: asks for one paragraph of comparative reasoning.
// Placeholders {PROMPT}, {ANSWER1}, {ANSWER2}. Mirrored byte-for-byte by
// data/prompts/reasoning_prompt.txt.
extern const std::string_view kReasoningPromptTemplate;

// Stage-2 template: asks for exactly one integer (1, 2, or 0) and ends with
// "The author prefers Answer #:". Placeholder {REASONING}. Mirrored by
// data/prompts/preference_prompt.txt.
extern const std::string_view kPreferencePromptTemplate;

// Single-pass placeholder substitution: scans `tmpl` once, so replacement
// text is never rescanned even if it happens to contain placeholder syntax.
// Throws ValidationError if the template names a placeholder not in `subs`.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& subs);

// Builds the stage-1 prompt with the contest's answers in the given
// presentation order (BA swaps which stored response appears as Answer #1).
std::string build_reasoning_prompt(const ContestRecord& contest,
                                   PresentationOrder order);

// Builds the stage-2 prompt around a non-empty reasoning passage.
std::string build_preference_prompt(const std::string& reasoning);

enum class ParseMode { Strict, Lenient };

ParseMode parse_mode_from_string(const std::string& s);
std::string to_string(ParseMode mode);

// Reduces the judge's stage-2 reply to a Choice.
// Strict: the reply must be exactly one of "1"/"2"/"0" after trimming
// whitespace. Lenient: the first standalone digit among {0,1,2} (not
// adjacent to another alphanumeric) decides. Throws PreferenceParseError
// (carrying the raw reply) when no decision can be extracted.
Choice parse_preference(std::string_view raw, ParseMode mode);

}  // namespace verdict
