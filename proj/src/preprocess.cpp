#include "gamsum/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "gamsum/error.hpp"
#include "gamsum/stemmer.hpp"

namespace gamsum {

namespace {

bool is_ascii_letter(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// % and $ are content symbols, not punctuation: they carry numeric /
// monetary information and count as sentence terms.
bool is_content_symbol(unsigned char c) { return c == '%' || c == '$'; }

// Well-known multibyte punctuation (curly quotes, dashes, ellipsis).
// Returns sequence length, or 0 if the bytes are not one of these.
std::size_t utf8_punct_len(const std::string& s, std::size_t i) {
    auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[i + k]); };
    if (i + 2 < s.size() && b(0) == 0xE2 && b(1) == 0x80) return 3;
    if (i + 1 < s.size() && b(0) == 0xC2 && (b(1) == 0xAB || b(1) == 0xBB)) return 2;
    return 0;
}

bool is_punct_byte(unsigned char c) {
    return c < 0x80 && !is_ascii_letter(c) && !is_ascii_digit(c) && !is_space(c) &&
           !is_content_symbol(c);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Optional sign, digits with optional grouping separators, optional
// decimal part, optional percent suffix.
bool matches_numeric(const std::string& s) {
    std::size_t i = 0;
    std::size_t n = s.size();
    if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
    if (i >= n || !is_ascii_digit(s[i])) return false;
    while (i < n && is_ascii_digit(s[i])) ++i;
    while (i + 1 < n && (s[i] == ',' || s[i] == '.') && is_ascii_digit(s[i + 1])) {
        ++i;
        while (i < n && is_ascii_digit(s[i])) ++i;
    }
    if (i < n && s[i] == '%') ++i;
    return i == n;
}

bool all_punctuation(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::size_t len = utf8_punct_len(s, i)) {
            i += len;
            continue;
        }
        if (!is_punct_byte(static_cast<unsigned char>(s[i]))) return false;
        ++i;
    }
    return !s.empty();
}

bool is_alphabetic_word(const std::string& s) {
    if (s.empty()) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (is_ascii_letter(c) || c >= 0x80) continue;
        if (c == '\'' && i > 0 && i + 1 < s.size()) continue; // O'Brien, don't
        return false;
    }
    return true;
}

bool is_capitalized(const std::string& s) {
    return !s.empty() && s[0] >= 'A' && s[0] <= 'Z';
}

// Splits one sentence into tokens: word runs (internal apostrophes kept),
// numeric runs, single content symbols, maximal punctuation runs.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_ascii_digit(c) ||
            ((c == '+' || c == '-') && i + 1 < n && is_ascii_digit(static_cast<unsigned char>(text[i + 1])))) {
            if (c == '+' || c == '-') ++i;
            while (i < n && is_ascii_digit(static_cast<unsigned char>(text[i]))) ++i;
            while (i + 1 < n && (text[i] == ',' || text[i] == '.') &&
                   is_ascii_digit(static_cast<unsigned char>(text[i + 1]))) {
                ++i;
                while (i < n && is_ascii_digit(static_cast<unsigned char>(text[i]))) ++i;
            }
            if (i < n && text[i] == '%') ++i;
        } else if (is_ascii_letter(c) || (c >= 0x80 && utf8_punct_len(text, i) == 0)) {
            while (i < n) {
                unsigned char u = static_cast<unsigned char>(text[i]);
                if (is_ascii_letter(u) || (u >= 0x80 && utf8_punct_len(text, i) == 0)) {
                    ++i;
                } else if (u == '\'' && i + 1 < n && i > start &&
                           is_ascii_letter(static_cast<unsigned char>(text[i + 1]))) {
                    ++i; // word-internal apostrophe
                } else {
                    break;
                }
            }
        } else if (is_content_symbol(c)) {
            ++i;
        } else {
            // punctuation run
            while (i < n) {
                if (std::size_t len = utf8_punct_len(text, i)) {
                    i += len;
                    continue;
                }
                unsigned char u = static_cast<unsigned char>(text[i]);
                if (is_punct_byte(u)) ++i;
                else break;
            }
        }
        tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

bool ends_with_ci(const std::string& lower_text, std::size_t end,
                  const std::string& lower_suffix) {
    if (lower_suffix.size() > end) return false;
    return lower_text.compare(end - lower_suffix.size(), lower_suffix.size(),
                              lower_suffix) == 0;
}

} // namespace

std::vector<const Token*> Sentence::terms() const {
    std::vector<const Token*> out;
    for (const Token& t : tokens)
        if (!t.is_punctuation) out.push_back(&t);
    return out;
}

std::size_t Sentence::term_count() const {
    std::size_t n = 0;
    for (const Token& t : tokens)
        if (!t.is_punctuation) ++n;
    return n;
}

std::vector<std::string> Sentence::content_stems() const {
    std::vector<std::string> out;
    for (const Token& t : tokens)
        if (!t.is_punctuation && !t.is_stopword) out.push_back(t.stem);
    return out;
}

LanguageData load_language_data(const std::string& data_dir) {
    auto read_list = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open word list: " + path);
        std::vector<std::string> entries;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
                line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            entries.push_back(to_lower(line));
        }
        return entries;
    };
    LanguageData lang;
    lang.stopwords = read_list(data_dir + "/stopwords_en.txt");
    lang.abbreviations = read_list(data_dir + "/abbreviations_en.txt");
    return lang;
}

std::vector<std::string> segment_sentences(const std::string& body,
                                           const LanguageData& lang) {
    const std::string lower = to_lower(body);
    std::vector<std::string> sentences;
    const std::size_t n = body.size();
    std::size_t start = 0;

    auto flush = [&](std::size_t end) {
        std::size_t a = start, b = end;
        while (a < b && is_space(static_cast<unsigned char>(body[a]))) ++a;
        while (b > a && is_space(static_cast<unsigned char>(body[b - 1]))) --b;
        if (b > a) sentences.push_back(body.substr(a, b - a));
        start = end;
    };

    for (std::size_t i = 0; i < n; ++i) {
        char c = body[i];
        if (c != '.' && c != '!' && c != '?') continue;

        // Closing quotes/brackets may sit between the terminal and the gap.
        std::size_t j = i + 1;
        while (j < n && (body[j] == '"' || body[j] == '\'' || body[j] == ')' || body[j] == ']'))
            ++j;
        std::size_t gap = j;
        while (j < n && is_space(static_cast<unsigned char>(body[j]))) ++j;
        if (j == gap || j >= n) continue; // no whitespace after -> not a boundary
        char next = body[j];
        bool starts_sentence = (next >= 'A' && next <= 'Z') || is_ascii_digit(next) ||
                               next == '"' || next == '\'';
        if (!starts_sentence) continue;

        if (c == '.') {
            bool abbreviated = false;
            for (const std::string& abbr : lang.abbreviations) {
                if (!ends_with_ci(lower, i + 1, abbr)) continue;
                // Entry must align with a token start (avoid "grid." matching "id.").
                std::size_t at = i + 1 - abbr.size();
                if (at == 0 || is_space(static_cast<unsigned char>(body[at - 1])) ||
                    abbr.find(' ') != std::string::npos) {
                    abbreviated = true;
                    break;
                }
            }
            if (abbreviated) continue;
        }
        flush(gap);
    }
    flush(n);

    if (sentences.empty()) {
        // Whole body is whitespace-only; callers reject this as empty.
        return sentences;
    }
    return sentences;
}

std::vector<Token> annotate(const std::string& sentence_raw, bool sentence_initial,
                            const LanguageData& lang) {
    std::unordered_set<std::string> stopset(lang.stopwords.begin(), lang.stopwords.end());
    std::vector<Token> out;
    bool seen_alphabetic = false;
    for (const std::string& surface : tokenize(sentence_raw)) {
        Token tok;
        tok.surface = surface;
        tok.is_punctuation = all_punctuation(surface);
        tok.is_numeric = !tok.is_punctuation && matches_numeric(surface);
        std::string lower = to_lower(surface);
        tok.is_stopword = !tok.is_punctuation && stopset.count(lower) > 0;
        bool alphabetic = is_alphabetic_word(surface);
        bool initial_position = sentence_initial && !seen_alphabetic && alphabetic;
        tok.is_proper_noun = alphabetic && is_capitalized(surface) && !tok.is_stopword &&
                             !initial_position;
        if (alphabetic) seen_alphabetic = true;
        tok.stem = alphabetic ? stem_english(lower) : lower;
        out.push_back(std::move(tok));
    }
    return out;
}

Document preprocess_document(const RawDocument& raw, const LanguageData& lang) {
    Document doc;
    doc.id = raw.id;
    doc.raw_reference = raw.reference;
    doc.labels = raw.labels;

    std::vector<std::string> raw_sentences = segment_sentences(raw.body, lang);
    for (const std::string& raw_sentence : raw_sentences) {
        Sentence s;
        s.raw = raw_sentence;
        s.tokens = annotate(raw_sentence, /*sentence_initial=*/true, lang);
        if (s.term_count() == 0) continue; // nothing extractable in this span
        s.index = doc.sentences.size();
        doc.sentences.push_back(std::move(s));
    }
    if (doc.sentences.empty())
        throw ValidationError("empty document: no extractable sentences in '" + raw.id + "'");

    for (std::size_t i = 0; i < raw.reference.size(); ++i) {
        Sentence s;
        s.index = i;
        s.raw = raw.reference[i];
        s.tokens = annotate(raw.reference[i], /*sentence_initial=*/true, lang);
        doc.reference_sentences.push_back(std::move(s));
    }

    // Document-level proper-noun resolution: a sentence-initial capitalized
    // word counts as a proper noun only if it also shows up capitalized in
    // a non-initial position somewhere in the document.
    std::unordered_set<std::string> witnesses;
    auto collect = [&](const std::vector<Sentence>& sentences) {
        for (const Sentence& s : sentences) {
            bool seen_alphabetic = false;
            for (const Token& t : s.tokens) {
                bool alphabetic = is_alphabetic_word(t.surface);
                if (alphabetic && seen_alphabetic && is_capitalized(t.surface))
                    witnesses.insert(to_lower(t.surface));
                if (alphabetic) seen_alphabetic = true;
            }
        }
    };
    collect(doc.sentences);
    collect(doc.reference_sentences);

    auto resolve = [&](std::vector<Sentence>& sentences) {
        for (Sentence& s : sentences) {
            for (Token& t : s.tokens) {
                if (!is_alphabetic_word(t.surface)) continue;
                // only the first alphabetic token was held back by annotate
                if (!t.is_proper_noun && is_capitalized(t.surface) && !t.is_stopword &&
                    witnesses.count(to_lower(t.surface)) > 0)
                    t.is_proper_noun = true;
                break;
            }
        }
    };
    resolve(doc.sentences);
    resolve(doc.reference_sentences);

    if (doc.labels && doc.labels->size() != doc.sentences.size())
        throw ValidationError("document '" + raw.id + "': " +
                              std::to_string(doc.labels->size()) +
                              " labels for " + std::to_string(doc.sentences.size()) +
                              " sentences");
    return doc;
}

} // namespace gamsum
