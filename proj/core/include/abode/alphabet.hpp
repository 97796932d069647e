#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace abode {

/// Canonical single-letter amino-acid order used for label logits.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kNumAminoAcids = 20;

/// Index of a one-letter code in kAlphabet, or nullopt for anything else.
std::optional<std::size_t> residue_index(char letter);
/// Index of a one-letter code; throws ConfigError naming the letter.
std::size_t checked_residue_index(char letter);
/// Standard three-letter name (upper case) to one-letter code.
std::optional<char> one_letter(std::string_view three_letter);
/// Three-letter name of a one-letter code; throws ConfigError for unknown letters.
std::string_view three_letter(char letter);
/// Throws ConfigError unless every letter is in the alphabet.
void validate_sequence(std::string_view sequence);

}  // namespace abode
