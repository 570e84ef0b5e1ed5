#include "magnav/instruction.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "magnav/common.hpp"

namespace magnav {

namespace {

const std::set<std::string_view> kVerbs = {"find",   "locate", "search", "look", "go",   "navigate", "take",
                                           "bring",  "get",    "reach",  "fetch", "move", "walk",     "head",
                                           "show",   "seek",   "approach"};

const std::set<std::string_view> kSkip = {"to",   "for",  "me",  "the",    "a",      "an",     "my",
                                          "your", "this", "that", "some",  "please", "toward", "towards",
                                          "at",   "his",  "her",  "our",   "their",  "up",     "out"};

const std::set<std::string_view> kDeterminers = {"the", "a",    "an",  "my",  "your", "this",
                                                 "that", "some", "his", "her", "our",  "their"};

const std::set<std::string_view> kConnectors = {"and", "that", "which", "with", "where", "who", "please", "then"};

const std::set<std::string_view> kAdjectives = {
    "black",   "white",   "red",     "green",  "blue",     "yellow",   "brown",  "gray",    "grey",
    "orange",  "pink",    "purple",  "silver", "golden",   "gold",     "beige",  "dark",    "light",
    "small",   "large",   "big",     "little", "tall",     "short",    "long",   "tiny",    "huge",
    "wooden",  "wood",    "metal",   "metallic", "plastic", "leather", "glass",  "fabric",  "ceramic",
    "round",   "square",  "rectangular", "old", "new",     "soft",     "striped", "empty",  "open",
    "closed",  "white-ish"};

// Longest phrases first so "to the left of" wins over "left of".
const std::array<std::string_view, 17> kRelations = {
    "to the left of", "to the right of", "in front of", "on top of", "next to", "close to", "left of",
    "right of",       "beside",          "behind",      "near",      "under",   "above",    "inside",
    "on",             "by",              "in"};

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) || ch == '-' || ch == '\'') {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_words(std::string_view s) { return tokenize(s); }

// Length in tokens of the relation starting at `i`, 0 if none.
std::size_t relation_at(const std::vector<std::string>& toks, std::size_t i, std::string* name) {
  for (std::string_view rel : kRelations) {
    const auto words = split_words(rel);
    if (i + words.size() > toks.size()) continue;
    if (std::equal(words.begin(), words.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) {
      if (name) *name = std::string(rel);
      return words.size();
    }
  }
  return 0;
}

struct NounPhrase {
  std::vector<std::string> adjectives;
  std::string noun;
};

NounPhrase parse_phrase(const std::vector<std::string>& words) {
  NounPhrase np;
  std::size_t i = 0;
  while (i < words.size() && kDeterminers.count(words[i])) ++i;
  while (i < words.size() && kAdjectives.count(words[i])) np.adjectives.push_back(words[i++]);
  for (; i < words.size(); ++i) {
    if (kDeterminers.count(words[i])) continue;
    if (!np.noun.empty()) np.noun += ' ';
    np.noun += words[i];
  }
  return np;
}

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

}  // namespace

std::vector<std::string> Instruction::classes() const {
  std::vector<std::string> out{target_class};
  for (const auto& l : landmark_classes)
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  return out;
}

Instruction parse_instruction(std::string_view raw_text) {
  const auto toks = tokenize(raw_text);
  if (toks.empty()) throw InputError("empty instruction; supply target_class and landmark_classes directly");

  Instruction ins;
  ins.raw_text = std::string(raw_text);

  // Start after the last verb of the leading verb run ("go find the ...").
  std::size_t start = 0;
  auto first_verb = std::find_if(toks.begin(), toks.end(), [](const std::string& t) { return kVerbs.count(t) > 0; });
  if (first_verb != toks.end()) {
    start = static_cast<std::size_t>(first_verb - toks.begin());
    while (start < toks.size() && (kVerbs.count(toks[start]) || kSkip.count(toks[start]))) {
      if (kDeterminers.count(toks[start])) break;
      ++start;
    }
  }

  // Split the rest into the target phrase and (relation, phrase) segments.
  std::vector<std::string> current;
  std::string relation;  // empty for the target segment
  bool stopped = false;
  auto flush = [&]() {
    if (current.empty()) return;
    NounPhrase np = parse_phrase(current);
    current.clear();
    if (np.noun.empty()) return;
    ins.attributes.insert(ins.attributes.end(), np.adjectives.begin(), np.adjectives.end());
    if (relation.empty() && ins.target_class.empty()) {
      ins.target_class = np.noun;
      ins.target_attributes = np.adjectives;
    } else if (!relation.empty()) {
      if (std::find(ins.landmark_classes.begin(), ins.landmark_classes.end(), np.noun) == ins.landmark_classes.end())
        ins.landmark_classes.push_back(np.noun);
      ins.landmark_relations.emplace_back(np.noun, relation);
    }
  };
  for (std::size_t i = start; i < toks.size() && !stopped;) {
    std::string rel;
    if (const std::size_t n = relation_at(toks, i, &rel); n > 0) {
      flush();
      relation = rel;
      i += n;
      continue;
    }
    if (kConnectors.count(toks[i])) {
      flush();
      // "and" keeps listing under the same relation; other connectors end the description.
      if (toks[i] != "and" && !ins.target_class.empty()) stopped = true;
      ++i;
      continue;
    }
    current.push_back(toks[i]);
    ++i;
  }
  flush();

  if (ins.target_class.empty()) {
    ins.target_class = join(toks);
    ins.target_attributes.clear();
  }
  return ins;
}

}  // namespace magnav
