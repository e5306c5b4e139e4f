#ifndef GAMSUM_CORPUS_HPP
#define GAMSUM_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gamsum {

// One corpus record: raw article text plus its reference-summary sentences.
// Optional pre-computed sentence labels (aligned with the segmenter's
// output) let externally labeled corpora bypass the greedy oracle.
struct RawDocument {
    std::string id;
    std::string body;
    std::vector<std::string> reference;
    std::optional<std::vector<int>> labels;
};

struct CorpusSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

// Reads a UTF-8 corpus file, one JSON record per line with fields
// id / body / reference (and optional labels). Records come back in file
// order. Malformed lines raise ParseError naming the 1-based line number;
// duplicate ids raise ValidationError.
std::vector<RawDocument> load_corpus(const std::string& path);

// Deterministic seeded partition of ids into train/validation/test.
// Ratios must be positive and sum to 1 within 1e-9. Sizes follow
// floor-and-remainder assignment: each split gets floor(ratio*n), leftover
// slots go to splits in order of largest fractional remainder.
CorpusSplit split_corpus(const std::vector<std::string>& ids,
                         double train_ratio, double validation_ratio,
                         double test_ratio, std::uint64_t seed);

void save_split(const CorpusSplit& split, const std::string& path);
CorpusSplit load_split(const std::string& path);

} // namespace gamsum

#endif
