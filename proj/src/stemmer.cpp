#include "gamsum/stemmer.hpp"

#include <array>
#include <algorithm>
#include <cstddef>
#include <vector>

// Snowball English (Porter2). Straight transcription of the published
// algorithm: preliminary y-marking, regions R1/R2, steps 0-5, exception
// lists. Within a step the longest listed suffix that matches fires; if
// its condition fails the step ends without trying shorter suffixes.

namespace gamsum {
namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool is_double(std::string_view w) {
    if (w.size() < 2) return false;
    char a = w[w.size() - 2], b = w[w.size() - 1];
    if (a != b) return false;
    switch (a) {
    case 'b': case 'd': case 'f': case 'g': case 'm':
    case 'n': case 'p': case 'r': case 't':
        return true;
    default:
        return false;
    }
}

bool valid_li_ending(char c) {
    switch (c) {
    case 'c': case 'd': case 'e': case 'g': case 'h':
    case 'k': case 'm': case 'n': case 'r': case 't':
        return true;
    default:
        return false;
    }
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Short syllable: vowel + non-vowel (not w/x/Y) preceded by a non-vowel,
// or vowel at word start followed by a non-vowel.
bool ends_in_short_syllable(std::string_view w) {
    std::size_t n = w.size();
    if (n == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
    if (n >= 3) {
        char c = w[n - 1];
        return !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(c) &&
               c != 'w' && c != 'x' && c != 'Y';
    }
    return false;
}

struct Regions {
    std::size_t r1;
    std::size_t r2;
};

std::size_t region_after_vowel_nonvowel(std::string_view w, std::size_t from) {
    std::size_t i = from;
    while (i < w.size() && !is_vowel(w[i])) ++i; // first vowel
    while (i < w.size() && is_vowel(w[i])) ++i;  // first non-vowel after it
    return i < w.size() ? i + 1 : w.size();
}

Regions compute_regions(std::string_view w) {
    Regions r;
    r.r1 = region_after_vowel_nonvowel(w, 0);
    for (std::string_view prefix : {"gener", "commun", "arsen"}) {
        if (w.substr(0, prefix.size()) == prefix) {
            r.r1 = prefix.size();
            break;
        }
    }
    r.r2 = region_after_vowel_nonvowel(w, r.r1);
    return r;
}

bool in_region(std::string_view w, std::size_t region, std::size_t suffix_len) {
    return w.size() - suffix_len >= region;
}

struct SpecialWord {
    std::string_view from;
    std::string_view to;
};

constexpr std::array<SpecialWord, 18> kException1 = {{
    {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},
    {"lying", "lie"},    {"tying", "tie"},   {"idly", "idl"},
    {"gently", "gentl"}, {"ugly", "ugli"},   {"early", "earli"},
    {"only", "onli"},    {"singly", "singl"},
    {"sky", "sky"},      {"news", "news"},   {"howe", "howe"},
    {"atlas", "atlas"},  {"cosmos", "cosmos"}, {"bias", "bias"},
    {"andes", "andes"},
}};

constexpr std::array<std::string_view, 8> kException2 = {
    "inning", "outing", "canning", "herring",
    "earring", "proceed", "exceed", "succeed",
};

bool contains_vowel(std::string_view w) {
    return std::any_of(w.begin(), w.end(), is_vowel);
}

void step0(std::string& w) {
    if (ends_with(w, "'s'")) w.resize(w.size() - 3);
    else if (ends_with(w, "'s")) w.resize(w.size() - 2);
    else if (ends_with(w, "'")) w.resize(w.size() - 1);
}

void step1a(std::string& w) {
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ied") || ends_with(w, "ies")) {
        if (w.size() > 4) w.resize(w.size() - 2); // preceded by >1 letter -> i
        else w.resize(w.size() - 1);              // -> ie
    } else if (ends_with(w, "us") || ends_with(w, "ss")) {
        // no action
    } else if (ends_with(w, "s")) {
        // delete if a vowel exists before the penultimate position
        if (w.size() >= 3 && contains_vowel(std::string_view(w).substr(0, w.size() - 2)))
            w.resize(w.size() - 1);
    }
}

void step1b(std::string& w, const Regions& r) {
    if (ends_with(w, "eedly")) {
        if (in_region(w, r.r1, 5)) w.resize(w.size() - 3);
        return;
    }
    if (ends_with(w, "eed")) {
        if (in_region(w, r.r1, 3)) w.resize(w.size() - 1);
        return;
    }
    std::size_t cut = 0;
    if (ends_with(w, "ingly") || ends_with(w, "edly")) cut = ends_with(w, "ingly") ? 5 : 4;
    else if (ends_with(w, "ing")) cut = 3;
    else if (ends_with(w, "ed")) cut = 2;
    if (cut == 0) return;
    if (!contains_vowel(std::string_view(w).substr(0, w.size() - cut))) return;
    w.resize(w.size() - cut);
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w += 'e';
    } else if (is_double(w)) {
        w.resize(w.size() - 1);
    } else if (r.r1 >= w.size() && ends_in_short_syllable(w)) {
        w += 'e';
    }
}

void step1c(std::string& w) {
    std::size_t n = w.size();
    if (n >= 3 && (w[n - 1] == 'y' || w[n - 1] == 'Y') && !is_vowel(w[n - 2]))
        w[n - 1] = 'i';
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

void step2(std::string& w, const Regions& r) {
    static constexpr std::array<Rule, 24> rules = {{
        {"ization", "ize"}, {"fulness", "ful"}, {"ousness", "ous"},
        {"iveness", "ive"}, {"ational", "ate"}, {"biliti", "ble"},
        {"tional", "tion"}, {"lessli", "less"}, {"ousli", "ous"},
        {"ation", "ate"},   {"entli", "ent"},   {"alism", "al"},
        {"aliti", "al"},    {"fulli", "ful"},   {"iviti", "ive"},
        {"enci", "ence"},   {"anci", "ance"},   {"abli", "able"},
        {"izer", "ize"},    {"ator", "ate"},    {"alli", "al"},
        {"ogi", "og"},      {"bli", "ble"},     {"li", ""},
    }};
    for (const Rule& rule : rules) {
        if (!ends_with(w, rule.suffix)) continue;
        if (in_region(w, r.r1, rule.suffix.size())) {
            if (rule.suffix == "ogi") {
                if (w.size() >= 4 && w[w.size() - 4] == 'l')
                    w.resize(w.size() - 1);
            } else if (rule.suffix == "li") {
                if (w.size() >= 3 && valid_li_ending(w[w.size() - 3]))
                    w.resize(w.size() - 2);
            } else {
                w.resize(w.size() - rule.suffix.size());
                w += rule.replacement;
            }
        }
        return; // longest match fires even if its condition failed
    }
}

void step3(std::string& w, const Regions& r) {
    static constexpr std::array<Rule, 9> rules = {{
        {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"},
        {"icate", "ic"},    {"iciti", "ic"},    {"ative", ""},
        {"ical", "ic"},     {"ful", ""},        {"ness", ""},
    }};
    for (const Rule& rule : rules) {
        if (!ends_with(w, rule.suffix)) continue;
        if (in_region(w, r.r1, rule.suffix.size())) {
            if (rule.suffix == "ative") {
                if (in_region(w, r.r2, 5)) w.resize(w.size() - 5);
            } else {
                w.resize(w.size() - rule.suffix.size());
                w += rule.replacement;
            }
        }
        return;
    }
}

void step4(std::string& w, const Regions& r) {
    static constexpr std::array<std::string_view, 18> suffixes = {
        "ement", "ance", "ence", "able", "ible", "ment",
        "ant",  "ent",  "ism",  "ate",  "iti",  "ous",
        "ive",  "ize",  "ion",  "al",   "er",   "ic",
    };
    for (std::string_view suf : suffixes) {
        if (!ends_with(w, suf)) continue;
        if (in_region(w, r.r2, suf.size())) {
            if (suf == "ion") {
                char prev = w.size() >= 4 ? w[w.size() - 4] : '\0';
                if (prev == 's' || prev == 't') w.resize(w.size() - 3);
            } else {
                w.resize(w.size() - suf.size());
            }
        }
        return;
    }
}

void step5(std::string& w, const Regions& r) {
    if (ends_with(w, "e")) {
        bool in_r2 = in_region(w, r.r2, 1);
        bool in_r1 = in_region(w, r.r1, 1);
        std::string_view before(w.data(), w.size() - 1);
        if (in_r2 || (in_r1 && !ends_in_short_syllable(before)))
            w.resize(w.size() - 1);
    } else if (ends_with(w, "l")) {
        if (in_region(w, r.r2, 1) && w.size() >= 2 && w[w.size() - 2] == 'l')
            w.resize(w.size() - 1);
    }
}

} // namespace

std::string stem_english(std::string_view word) {
    std::string w(word);
    if (w.size() <= 2) return w;

    for (const SpecialWord& sp : kException1)
        if (w == sp.from) return std::string(sp.to);

    if (w.front() == '\'') w.erase(0, 1);

    // Mark consonant y as Y: word-initial, or directly after a vowel.
    if (!w.empty() && w[0] == 'y') w[0] = 'Y';
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';

    Regions r = compute_regions(w);

    step0(w);
    step1a(w);

    bool invariant = std::find(kException2.begin(), kException2.end(), w) != kException2.end();
    if (!invariant) {
        step1b(w, r);
        step1c(w);
        step2(w, r);
        step3(w, r);
        step4(w, r);
        step5(w, r);
    }

    for (char& c : w)
        if (c == 'Y') c = 'y';
    return w;
}

} // namespace gamsum
