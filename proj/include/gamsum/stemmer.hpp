#ifndef GAMSUM_STEMMER_HPP
#define GAMSUM_STEMMER_HPP

#include <string>
#include <string_view>

namespace gamsum {

// Snowball English (Porter2) stemmer. Input is expected lowercase; bytes
// outside a-z and apostrophe are treated as consonants and passed through.
std::string stem_english(std::string_view word);

} // namespace gamsum

#endif
