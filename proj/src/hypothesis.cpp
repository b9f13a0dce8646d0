#include "abductir/hypothesis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

namespace abductir {

namespace {

constexpr std::array<std::string_view, 6> kWhWords = {"what", "which", "who", "whom", "where", "when"};
constexpr std::array<std::string_view, 18> kAuxiliaries = {
    "is",  "are", "was",  "were",  "be",  "can",   "could",  "would", "will",
    "should", "may", "might", "must", "do", "does", "did", "has", "have"};
constexpr std::array<std::string_view, 12> kGenericNouns = {
    "thing", "things", "item", "items", "animal", "animals",
    "object", "objects", "option", "options", "example", "examples"};

template <std::size_t N>
bool one_of(std::string_view word, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), word) != set.end();
}

std::string lower_word(std::string_view w) {
  std::string out;
  for (char c : w) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u) && c != '-' && c != '_') continue;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::size_t from = 0,
                       std::size_t to = std::string::npos) {
  std::string out;
  to = std::min(to, words.size());
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

std::string strip_terminal(std::string_view s) {
  std::string out = trim(s);
  while (!out.empty() && (is_terminal(out.back()) || out.back() == ' ')) out.pop_back();
  return out;
}

/// Splits the stem into everything before the last sentence and the last
/// sentence itself.
std::pair<std::string, std::string> split_last_sentence(const std::string& stem) {
  std::size_t cut = std::string::npos;
  for (std::size_t i = 0; i + 1 < stem.size(); ++i) {
    if (is_terminal(stem[i]) && stem[i + 1] == ' ') {
      auto rest = trim(std::string_view(stem).substr(i + 1));
      if (!rest.empty() && !std::all_of(rest.begin(), rest.end(), [](char c) { return is_terminal(c) || c == ' '; })) {
        cut = i + 1;
      }
    }
  }
  if (cut == std::string::npos) return {"", stem};
  return {trim(std::string_view(stem).substr(0, cut)), trim(std::string_view(stem).substr(cut))};
}

std::string finish(const std::string& prefix, const std::string& sentence) {
  std::string body = strip_terminal(sentence);
  std::string out = prefix.empty() ? body : prefix + " " + body;
  return out + ".";
}

}  // namespace

std::string to_string(HypothesisRule rule) {
  switch (rule) {
    case HypothesisRule::wh_in_place: return "wh_in_place";
    case HypothesisRule::which_of_these: return "which_of_these";
    case HypothesisRule::wh_do_support: return "wh_do_support";
    case HypothesisRule::wh_subject: return "wh_subject";
    case HypothesisRule::placeholder: return "placeholder";
    case HypothesisRule::append: return "append";
    case HypothesisRule::empty_option: return "empty_option";
  }
  return "append";
}

HypothesisText make_hypothesis_text(std::string_view stem_view, std::string_view option_view) {
  const std::string stem = trim(stem_view);
  const std::string option = strip_terminal(option_view);
  if (option.empty()) return {stem, HypothesisRule::empty_option};

  auto [prefix, last] = split_last_sentence(stem);
  const std::string last_trimmed = trim(last);
  const bool question_mark = !last_trimmed.empty() && last_trimmed.back() == '?';
  auto words = split_words(strip_terminal(last));
  std::vector<std::string> lw;
  lw.reserve(words.size());
  for (const auto& w : words) lw.push_back(lower_word(w));

  auto rebuild = [&](std::size_t from, std::size_t to, std::string replacement) {
    std::vector<std::string> out(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(from));
    out.push_back(std::move(replacement));
    out.insert(out.end(), words.begin() + static_cast<std::ptrdiff_t>(to), words.end());
    return join_words(out);
  };

  if (question_mark && !words.empty()) {
    // Wh-phrase somewhere after the first word: substitute in place.
    for (std::size_t i = words.size(); i-- > 1;) {
      if (lw[i] == "how" && i + 1 < words.size() && (lw[i + 1] == "many" || lw[i + 1] == "much")) {
        std::size_t end = std::min(i + 3, words.size());
        return {finish(prefix, rebuild(i, end, option)), HypothesisRule::wh_in_place};
      }
      if (!one_of(lw[i], kWhWords)) continue;
      std::size_t end = i + 1;
      if (lw[i] == "what" && end + 1 < words.size() &&
          (lw[end] == "kind" || lw[end] == "type" || lw[end] == "sort" || lw[end] == "part") &&
          lw[end + 1] == "of") {
        end = std::min(end + 3, words.size());
      } else if (lw[i] == "which" && end < words.size() && !one_of(lw[end], kAuxiliaries)) {
        end += 1;
      }
      return {finish(prefix, rebuild(i, end, option)), HypothesisRule::wh_in_place};
    }

    const std::string& first = lw[0];
    if (first == "which" && words.size() > 2 && lw[1] == "of" &&
        (lw[2] == "these" || (lw[2] == "the" && words.size() > 3 && lw[3] == "following"))) {
      std::size_t end = lw[2] == "these" ? 3 : 4;
      if (end < words.size() && one_of(lw[end], kGenericNouns)) ++end;
      if (end < words.size()) {
        return {finish(prefix, rebuild(0, end, option)), HypothesisRule::which_of_these};
      }
    }
    if ((first == "what" || first == "who" || first == "whom") && words.size() > 2 &&
        (lw[1] == "do" || lw[1] == "does" || lw[1] == "did")) {
      return {finish(prefix, join_words(words, 2) + " " + option), HypothesisRule::wh_do_support};
    }
    if ((first == "what" || first == "who" || first == "which") && words.size() > 1) {
      std::size_t end = 1;
      if (first == "which" && words.size() > 2 && !one_of(lw[1], kAuxiliaries)) end = 2;
      return {finish(prefix, rebuild(0, end, option)), HypothesisRule::wh_subject};
    }
  }

  // Incomplete statement or a wh-question no rule covers.
  if (auto pos = stem.find("___"); pos != std::string::npos) {
    auto end = stem.find_first_not_of('_', pos);
    if (end == std::string::npos) end = stem.size();
    std::string filled = stem.substr(0, pos) + " " + option + " " + stem.substr(end);
    return {finish("", join_words(split_words(filled))), HypothesisRule::placeholder};
  }
  std::string body = join_words(words);
  std::string sentence = body.empty() ? option : body + " " + option;
  return {finish(prefix, sentence), question_mark ? HypothesisRule::placeholder : HypothesisRule::append};
}

HypothesisSet generate_hypotheses(const Question& q, const TokenizerConfig& tokenizer) {
  TokenizerConfig cfg = tokenizer;
  cfg.remove_stopwords = true;
  HypothesisSet out;
  for (std::size_t j = 0; j < kOptionCount; ++j) {
    auto made = make_hypothesis_text(q.stem, q.options[j].text);
    auto& h = out[j];
    h.question_id = q.id;
    h.option_label = q.options[j].label;
    h.token_set = TokenSet::from_text(made.text, cfg);
    h.text = std::move(made.text);
    h.rule = made.rule;
  }
  return out;
}

}  // namespace abductir
