#pragma once

#include <array>
#include <string>
#include <string_view>

#include "abductir/corpus_io.hpp"
#include "abductir/text.hpp"

namespace abductir {

/// Which rewrite produced a hypothesis. Recorded in stage files for audit.
enum class HypothesisRule {
  wh_in_place,       // "... swoop down on what?" -> "... swoop down on a gecko."
  which_of_these,    // "Which of these would ...?" -> "<option> would ..."
  wh_do_support,     // "What does a plant need?" -> "a plant need <option>."
  wh_subject,        // "What eat plants?" / "Which animal eats plants?" -> "<option> eat plants."
  placeholder,       // "___" or a bare "?" slot replaced by the option
  append,            // option appended to the stem
  empty_option,      // option text empty; stem kept unchanged
};

std::string to_string(HypothesisRule rule);

struct HypothesisText {
  std::string text;
  HypothesisRule rule = HypothesisRule::append;
};

/// Turns a stem and one option into a declarative sentence. Only the last
/// sentence of the stem is rewritten; earlier sentences are kept verbatim.
/// Output ends with a single '.' (except for empty_option).
HypothesisText make_hypothesis_text(std::string_view stem, std::string_view option);

struct Hypothesis {
  std::string question_id;
  char option_label = 'A';
  std::string text;
  TokenSet token_set;  // stopwords removed
  HypothesisRule rule = HypothesisRule::append;

  bool degenerate() const noexcept { return rule == HypothesisRule::empty_option; }
};

using HypothesisSet = std::array<Hypothesis, kOptionCount>;

HypothesisSet generate_hypotheses(const Question& q, const TokenizerConfig& tokenizer = {});

}  // namespace abductir
