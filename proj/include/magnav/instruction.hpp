#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace magnav {

struct Instruction {
  std::string raw_text;
  std::string target_class;
  std::vector<std::string> landmark_classes;
  std::vector<std::string> target_attributes;  // adjectives on the target noun
  std::vector<std::string> attributes;         // every adjective, in order
  std::vector<std::pair<std::string, std::string>> landmark_relations;  // (landmark, relation)

  // {target} followed by the landmarks, duplicates removed.
  std::vector<std::string> classes() const;
};

// Rule-based extraction: the noun phrase after a find/take/navigate-to style
// verb is the target; noun phrases after spatial prepositions are landmarks;
// lexicon adjectives preceding a noun are attributes. Throws InputError for
// empty text.
Instruction parse_instruction(std::string_view raw_text);

}  // namespace magnav
