#include "abode/alphabet.hpp"

#include <array>
#include <utility>

#include "abode/error.hpp"

namespace abode {

namespace {

constexpr std::array<std::pair<std::string_view, char>, 20> kThreeLetter = {{
    {"ALA", 'A'}, {"CYS", 'C'}, {"ASP", 'D'}, {"GLU", 'E'}, {"PHE", 'F'},
    {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'}, {"LYS", 'K'}, {"LEU", 'L'},
    {"MET", 'M'}, {"ASN", 'N'}, {"PRO", 'P'}, {"GLN", 'Q'}, {"ARG", 'R'},
    {"SER", 'S'}, {"THR", 'T'}, {"VAL", 'V'}, {"TRP", 'W'}, {"TYR", 'Y'},
}};

}  // namespace

std::optional<std::size_t> residue_index(char letter) {
  const auto pos = kAlphabet.find(letter);
  if (pos == std::string_view::npos) return std::nullopt;
  return pos;
}

std::size_t checked_residue_index(char letter) {
  const auto idx = residue_index(letter);
  if (!idx) throw ConfigError(std::string("residue letter '") + letter + "' is not in the 20-letter alphabet");
  return *idx;
}

std::optional<char> one_letter(std::string_view three_letter) {
  for (const auto& [name, code] : kThreeLetter)
    if (name == three_letter) return code;
  return std::nullopt;
}

std::string_view three_letter(char letter) {
  for (const auto& [name, code] : kThreeLetter)
    if (code == letter) return name;
  throw ConfigError(std::string("residue letter '") + letter + "' is not in the 20-letter alphabet");
}

void validate_sequence(std::string_view sequence) {
  for (char c : sequence) checked_residue_index(c);
}

}  // namespace abode
