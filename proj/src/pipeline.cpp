#include "gamsum/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"

namespace gamsum {

using ordered_json = nlohmann::ordered_json;

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

std::vector<Document> preprocess_corpus(const std::vector<RawDocument>& raw,
                                        const LanguageData& lang, std::size_t workers) {
    std::vector<Document> docs(raw.size());
    std::vector<std::string> errors(raw.size());
    parallel_for(raw.size(), workers, [&](std::size_t i) {
        try {
            docs[i] = preprocess_document(raw[i], lang);
        } catch (const DataError& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& e : errors)
        if (!e.empty()) throw ValidationError(e);
    return docs;
}

std::vector<std::vector<int>> label_corpus(const std::vector<Document>& docs,
                                           const SummaryBudget& budget, std::size_t workers) {
    std::vector<std::vector<int>> labels(docs.size());
    std::vector<std::string> errors(docs.size());
    parallel_for(docs.size(), workers, [&](std::size_t i) {
        try {
            labels[i] = docs[i].labels ? *docs[i].labels
                                       : greedy_oracle_labels(docs[i], budget);
        } catch (const DataError& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& e : errors)
        if (!e.empty()) throw ValidationError(e);
    return labels;
}

namespace {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_labels_tsv(const LabeledCorpus& lc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write labels file: " + path);
    out << "doc_id\tsentence_index";
    for (const std::string& name : kFeatureNames) out << "\t" << name;
    out << "\tlabel\n";
    for (std::size_t d = 0; d < lc.docs.size(); ++d) {
        for (std::size_t s = 0; s < lc.labels[d].size(); ++s) {
            out << lc.docs[d].id << "\t" << s;
            for (double v : lc.features[d][s]) out << "\t" << format_g17(v);
            out << "\t" << lc.labels[d][s] << "\n";
        }
    }
}

LabelRows read_labels_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels file: " + path);
    LabelRows rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("doc_id\t", 0) == 0) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 2 + kFeatureCount + 1)
            throw ParseError("labels file line " + std::to_string(line_no) +
                             ": expected " + std::to_string(3 + kFeatureCount) + " columns");
        const std::string& id = fields[0];
        std::size_t index = std::stoul(fields[1]);
        FeatureVector fv{};
        for (std::size_t f = 0; f < kFeatureCount; ++f) fv[f] = std::stod(fields[2 + f]);
        int label = std::stoi(fields.back());
        if (label != 0 && label != 1)
            throw ParseError("labels file line " + std::to_string(line_no) +
                             ": label must be 0 or 1");
        if (rows.features.find(id) == rows.features.end()) rows.doc_ids.push_back(id);
        std::vector<FeatureVector>& fvs = rows.features[id];
        std::vector<int>& ls = rows.labels[id];
        if (index != fvs.size())
            throw ParseError("labels file line " + std::to_string(line_no) +
                             ": sentence indices out of order for doc '" + id + "'");
        fvs.push_back(fv);
        ls.push_back(label);
    }
    return rows;
}

// Early stopping compares logloss of a model trained on balanced rows, so
// the validation rows are balanced the same way; otherwise the base-rate
// mismatch dominates the signal and stops training far too early.
SplitMatrix balance_validation(const SplitMatrix& validation, std::uint64_t seed) {
    if (validation.x.empty()) return validation;
    TrainingSet set;
    for (std::size_t i = 0; i < validation.x.size(); ++i) {
        LabeledSentence s;
        s.doc_id = "val";
        s.sentence_index = i;
        s.features = validation.x[i];
        s.label = validation.y[i];
        set.rows.push_back(std::move(s));
    }
    if (set.positives() == 0 || set.negatives() == 0) return validation;
    TrainingSet balanced = undersample(set, seed);
    SplitMatrix out;
    for (const LabeledSentence& s : balanced.rows) {
        out.x.push_back(s.features);
        out.y.push_back(s.label);
    }
    return out;
}

SplitMatrix gather_split(const LabelRows& rows, const std::vector<std::string>& ids) {
    SplitMatrix m;
    for (const std::string& id : ids) {
        auto fit = rows.features.find(id);
        auto lit = rows.labels.find(id);
        if (fit == rows.features.end() || lit == rows.labels.end())
            throw ValidationError("no labeled sentences for document '" + id + "'");
        for (std::size_t s = 0; s < fit->second.size(); ++s) {
            m.x.push_back(fit->second[s]);
            m.y.push_back(lit->second[s]);
        }
    }
    return m;
}

namespace {

std::string ebm_config_echo(const EbmConfig& c) {
    std::ostringstream out;
    out << "rounds=" << c.rounds << " learning_rate=" << c.learning_rate
        << " max_leaves=" << c.max_leaves << " bags=" << c.bag_count
        << " bag_fraction=" << c.bag_fraction << " interactions=" << c.interactions
        << " max_bins=" << c.max_bins << " pair_max_bins=" << c.pair_max_bins
        << " patience=" << c.patience << " seed=" << c.seed;
    return out.str();
}

std::string gaminet_config_echo(const GaminetConfig& c) {
    std::ostringstream out;
    out << "epochs=" << c.stage_epochs[0] << "," << c.stage_epochs[1] << ","
        << c.stage_epochs[2] << " batch=" << c.batch_size << " step=" << c.step_size
        << " interactions=" << c.interactions << " tau=" << c.prune_tau
        << " lambda=" << c.clarity_weight << " hidden=";
    for (std::size_t i = 0; i < c.hidden.size(); ++i)
        out << (i ? "x" : "") << c.hidden[i];
    out << " seed=" << c.seed;
    return out.str();
}

std::string logistic_config_echo(const LogisticConfig& c) {
    std::ostringstream out;
    out << "max_iterations=" << c.max_iterations
        << " gradient_tolerance=" << c.gradient_tolerance << " max_bins=" << c.max_bins;
    return out.str();
}

} // namespace

ModelFile train_model(const SplitMatrix& train_balanced, const SplitMatrix& validation,
                      const TrainOptions& options, TrainLog* log) {
    const SplitMatrix empty;
    const SplitMatrix& val = options.use_validation ? validation : empty;

    ModelFile file;
    file.kind = options.kind;
    file.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    switch (options.kind) {
    case ModelKind::Ebm: {
        EbmConfig config = options.ebm;
        config.seed = options.seed;
        EbmReport report;
        file.model = train_ebm(train_balanced.x, train_balanced.y, val.x, val.y, config,
                               &report);
        file.config_echo = ebm_config_echo(config);
        if (log) {
            log->blocks.push_back({"mains", report.mains_log});
            log->blocks.push_back({"pairs", report.pairs_log});
        }
        break;
    }
    case ModelKind::Gaminet: {
        GaminetConfig config = options.gaminet;
        config.seed = options.seed;
        GaminetReport report;
        GaminetModel gm =
            train_gaminet(train_balanced.x, train_balanced.y, val.x, val.y, config, &report);
        file.model = gm.exported;
        file.native_bias = gm.bias;
        for (const Subnetwork& net : gm.mains) file.subnetworks.push_back(net);
        for (const Subnetwork& net : gm.pairs) file.subnetworks.push_back(net);
        file.config_echo = gaminet_config_echo(config);
        if (log) {
            log->blocks.push_back({"stage1", report.stage_log[0]});
            log->blocks.push_back({"stage2", report.stage_log[1]});
            log->blocks.push_back({"stage3", report.stage_log[2]});
        }
        break;
    }
    default: {
        LogisticFit fit = train_logistic(train_balanced.x, train_balanced.y, options.logistic);
        file.model = fit.model;
        file.config_echo = logistic_config_echo(options.logistic);
        if (log) {
            TrainLogEntry entry;
            entry.round = fit.iterations;
            entry.train_logloss = fit.gradient_norm; // final gradient max-norm
            entry.val_logloss = std::numeric_limits<double>::quiet_NaN();
            log->blocks.push_back({"gradient_descent", {entry}});
        }
        break;
    }
    }
    return file;
}

void write_train_log(const TrainLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write training log: " + path);
    out << "stage\tround\ttrain_logloss\tval_logloss\n";
    for (const TrainLog::Block& block : log.blocks)
        for (const TrainLogEntry& e : block.entries)
            out << block.stage << "\t" << e.round << "\t" << format_g17(e.train_logloss)
                << "\t" << format_g17(e.val_logloss) << "\n";
}

std::vector<Summary> summarize_corpus(const AdditiveModel& model,
                                      const std::vector<Document>& docs,
                                      const SummaryBudget& budget, std::size_t workers) {
    std::vector<Summary> out(docs.size());
    parallel_for(docs.size(), workers,
                 [&](std::size_t i) { out[i] = summarize(model, docs[i], budget); });
    return out;
}

void write_summaries(const std::vector<Summary>& summaries, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write summaries file: " + path);
    for (const Summary& s : summaries) {
        ordered_json j;
        j["id"] = s.doc_id;
        j["indices"] = s.indices;
        j["text"] = s.text;
        out << j.dump() << "\n";
    }
}

std::vector<Summary> read_summaries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open summaries file: " + path);
    std::vector<Summary> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            ordered_json j = ordered_json::parse(line);
            Summary s;
            s.doc_id = j.at("id").get<std::string>();
            s.indices = j.at("indices").get<std::vector<std::size_t>>();
            s.text = j.at("text").get<std::string>();
            s.empty_notice = s.indices.empty();
            out.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("summaries file line " + std::to_string(line_no) + ": " +
                             e.what());
        }
    }
    return out;
}

void export_explanations(const ModelFile& model, const std::vector<FeatureVector>& dataset,
                         const std::string& out_dir, ImportanceStatistic stat) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<TermImportance> importance = importance_ratios(model.model, dataset, stat);
    {
        std::ofstream out(out_dir + "/importance.tsv", std::ios::binary);
        if (!out) throw DataError("cannot write importance file");
        out << "rank\tterm\tratio\n";
        for (std::size_t r = 0; r < importance.size(); ++r)
            out << (r + 1) << "\t" << importance[r].name(model.feature_names) << "\t"
                << format_g17(importance[r].ratio) << "\n";
    }
    {
        // same content as structured records, for plotting tools
        ordered_json j = ordered_json::array();
        for (std::size_t r = 0; r < importance.size(); ++r) {
            ordered_json row;
            row["rank"] = r + 1;
            row["term"] = importance[r].name(model.feature_names);
            row["ratio"] = importance[r].ratio;
            j.push_back(row);
        }
        std::ofstream out(out_dir + "/importance.json", std::ios::binary);
        if (!out) throw DataError("cannot write importance file");
        out << j.dump(2) << "\n";
    }

    for (const ShapeTable& table : export_shape_tables(model.model)) {
        if (table.kind == TermContribution::Kind::Main) {
            std::string path =
                out_dir + "/shape_" + model.feature_names[table.feature_i] + ".tsv";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw DataError("cannot write shape table: " + path);
            out << "bin\tlo\thi\tcenter\tcontribution\n";
            for (std::size_t b = 0; b < table.rows.size(); ++b) {
                out << b;
                for (double v : table.rows[b]) out << "\t" << format_g17(v);
                out << "\n";
            }
        } else {
            std::string path = out_dir + "/shape_" + model.feature_names[table.feature_i] +
                               "_x_" + model.feature_names[table.feature_j] + ".tsv";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw DataError("cannot write shape table: " + path);
            out << "bin_i\tbin_j\tlo_i\thi_i\tlo_j\thi_j\tcontribution\n";
            for (std::size_t bi = 0; bi < table.grid.size(); ++bi)
                for (std::size_t bj = 0; bj < table.grid[bi].size(); ++bj)
                    out << bi << "\t" << bj << "\t" << format_g17(table.edges_i[bi].first)
                        << "\t" << format_g17(table.edges_i[bi].second) << "\t"
                        << format_g17(table.edges_j[bj].first) << "\t"
                        << format_g17(table.edges_j[bj].second) << "\t"
                        << format_g17(table.grid[bi][bj]) << "\n";
        }
    }
}

RepeatResult repeated_evaluation(const LabeledCorpus& lc, const CorpusSplit& split,
                                 const TrainOptions& options, const SummaryBudget& budget,
                                 std::size_t repeats, std::size_t workers) {
    if (repeats < 1) throw ValidationError("repeats must be >= 1");

    LabelRows rows;
    for (std::size_t d = 0; d < lc.docs.size(); ++d) {
        rows.doc_ids.push_back(lc.docs[d].id);
        rows.features[lc.docs[d].id] = lc.features[d];
        rows.labels[lc.docs[d].id] = lc.labels[d];
    }
    SplitMatrix validation = gather_split(rows, split.validation);

    std::map<std::string, std::size_t> doc_index;
    for (std::size_t d = 0; d < lc.docs.size(); ++d) doc_index[lc.docs[d].id] = d;
    std::vector<Document> test_docs;
    std::vector<std::vector<int>> test_labels;
    for (const std::string& id : split.test) {
        auto it = doc_index.find(id);
        if (it == doc_index.end())
            throw ValidationError("test split references unknown document '" + id + "'");
        test_docs.push_back(lc.docs[it->second]);
        test_labels.push_back(lc.labels[it->second]);
    }

    RepeatResult result;
    result.repeats = repeats;
    for (std::size_t r = 0; r < repeats; ++r) {
        TrainOptions opt = options;
        opt.seed = derive_seed(options.seed, "repeat-trainer", r);

        TrainingSet set;
        {
            std::size_t row = 0;
            for (const std::string& id : split.train) {
                const std::vector<int>& ls = rows.labels[id];
                for (std::size_t s = 0; s < ls.size(); ++s, ++row) {
                    LabeledSentence sentence;
                    sentence.doc_id = id;
                    sentence.sentence_index = s;
                    sentence.features = rows.features[id][s];
                    sentence.label = ls[s];
                    set.rows.push_back(std::move(sentence));
                }
            }
        }
        TrainingSet balanced = undersample(set, derive_seed(options.seed, "repeat-sample", r));
        SplitMatrix train;
        for (const LabeledSentence& s : balanced.rows) {
            train.x.push_back(s.features);
            train.y.push_back(s.label);
        }
        SplitMatrix val_balanced = balance_validation(
            validation, derive_seed(options.seed, "repeat-val-sample", r));

        ModelFile model = train_model(train, val_balanced, opt);
        std::vector<Summary> summaries =
            summarize_corpus(model.model, test_docs, budget, workers);
        EvalReport report = evaluate_rouge(test_docs, summaries);
        result.mean_rouge1_f += report.mean_rouge1_f;
        result.mean_rouge2_f += report.mean_rouge2_f;
        result.mean_rougeL_f += report.mean_rougeL_f;
        result.mean_sentence_f1 += sentence_f1(summaries, test_docs, test_labels);
    }
    result.mean_rouge1_f /= static_cast<double>(repeats);
    result.mean_rouge2_f /= static_cast<double>(repeats);
    result.mean_rougeL_f /= static_cast<double>(repeats);
    result.mean_sentence_f1 /= static_cast<double>(repeats);
    return result;
}

} // namespace gamsum
