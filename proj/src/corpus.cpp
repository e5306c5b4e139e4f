#include "gamsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"

namespace gamsum {

using ordered_json = nlohmann::ordered_json;

std::vector<RawDocument> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);

    std::vector<RawDocument> docs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("corpus line " + std::to_string(line_no) +
                             ": invalid JSON (" + e.what() + ")");
        }
        auto require = [&](const char* field) {
            if (!rec.contains(field))
                throw ParseError("corpus line " + std::to_string(line_no) +
                                 ": missing field '" + field + "'");
        };
        require("id");
        require("body");
        require("reference");
        RawDocument doc;
        try {
            doc.id = rec["id"].get<std::string>();
            doc.body = rec["body"].get<std::string>();
            doc.reference = rec["reference"].get<std::vector<std::string>>();
            if (rec.contains("labels"))
                doc.labels = rec["labels"].get<std::vector<int>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("corpus line " + std::to_string(line_no) +
                             ": bad field type (" + e.what() + ")");
        }
        if (doc.id.empty())
            throw ValidationError("corpus line " + std::to_string(line_no) + ": empty id");
        if (doc.body.empty())
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": empty body for id '" + doc.id + "'");
        if (!seen_ids.insert(doc.id).second)
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": duplicate id '" + doc.id + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

CorpusSplit split_corpus(const std::vector<std::string>& ids,
                         double train_ratio, double validation_ratio,
                         double test_ratio, std::uint64_t seed) {
    if (ids.empty()) throw ValidationError("split_corpus: empty id list");
    const double ratios[3] = {train_ratio, validation_ratio, test_ratio};
    double sum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw ValidationError("split_corpus: ratios must be positive");
        sum += r;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("split_corpus: ratios must sum to 1");

    std::vector<std::string> shuffled = ids;
    Rng rng(derive_seed(seed, "corpus-split"));
    rng.shuffle(shuffled);

    const std::size_t n = shuffled.size();
    std::size_t counts[3];
    double frac[3];
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        double exact = ratios[k] * static_cast<double>(n);
        counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-12));
        frac[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    // Hand out remainder slots by descending fractional part, split order
    // breaking ties.
    while (assigned < n) {
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (frac[k] > frac[best] + 1e-12) best = k;
        ++counts[best];
        frac[best] = -1.0;
        ++assigned;
    }

    CorpusSplit split;
    std::size_t pos = 0;
    split.train.assign(shuffled.begin() + pos, shuffled.begin() + pos + counts[0]);
    pos += counts[0];
    split.validation.assign(shuffled.begin() + pos, shuffled.begin() + pos + counts[1]);
    pos += counts[1];
    split.test.assign(shuffled.begin() + pos, shuffled.begin() + pos + counts[2]);
    return split;
}

void save_split(const CorpusSplit& split, const std::string& path) {
    ordered_json j;
    j["train"] = split.train;
    j["validation"] = split.validation;
    j["test"] = split.test;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write split file: " + path);
    out << j.dump() << "\n";
}

CorpusSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open split file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("split file " + path + ": invalid JSON (" + e.what() + ")");
    }
    CorpusSplit split;
    try {
        split.train = j.at("train").get<std::vector<std::string>>();
        split.validation = j.at("validation").get<std::vector<std::string>>();
        split.test = j.at("test").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("split file " + path + ": bad structure (" + e.what() + ")");
    }
    return split;
}

} // namespace gamsum
