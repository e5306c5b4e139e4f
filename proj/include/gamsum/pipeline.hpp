#ifndef GAMSUM_PIPELINE_HPP
#define GAMSUM_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gamsum/corpus.hpp"
#include "gamsum/ebm.hpp"
#include "gamsum/eval.hpp"
#include "gamsum/gaminet.hpp"
#include "gamsum/model_io.hpp"
#include "gamsum/oracle.hpp"
#include "gamsum/preprocess.hpp"
#include "gamsum/summarize.hpp"

namespace gamsum {

// Deterministic parallel map: [0, n) is split into `workers` contiguous
// chunks, each thread writes only its own slice, so results never depend
// on the worker count.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

std::vector<Document> preprocess_corpus(const std::vector<RawDocument>& raw,
                                        const LanguageData& lang, std::size_t workers);

// Greedy oracle labels per document; documents carrying externally
// computed labels keep them.
std::vector<std::vector<int>> label_corpus(const std::vector<Document>& docs,
                                           const SummaryBudget& budget, std::size_t workers);

// Feature+label dump, one row per sentence (doc_id, sentence_index,
// x1..x6, label), tab-separated.
struct LabeledCorpus {
    std::vector<Document> docs;                 // aligned with labels/features
    std::vector<std::vector<int>> labels;       // per doc, per sentence
    std::vector<std::vector<FeatureVector>> features;
};

void write_labels_tsv(const LabeledCorpus& lc, const std::string& path);
// Reads the dump back; row order must group by document.
struct LabelRows {
    std::vector<std::string> doc_ids;
    std::map<std::string, std::vector<FeatureVector>> features;
    std::map<std::string, std::vector<int>> labels;
};
LabelRows read_labels_tsv(const std::string& path);

struct TrainOptions {
    ModelKind kind = ModelKind::Ebm;
    EbmConfig ebm;
    GaminetConfig gaminet;
    LogisticConfig logistic;
    bool use_validation = true; // early stopping on the validation split
    std::uint64_t seed = 0;
};

// Flattens per-document rows for the given ids (document order, then
// sentence order), undersamples the training rows, trains the requested
// model kind.
struct SplitMatrix {
    std::vector<FeatureVector> x;
    std::vector<int> y;
};
SplitMatrix gather_split(const LabelRows& rows, const std::vector<std::string>& ids);

// Balances validation rows by undersampling (deterministic per seed) so
// early stopping sees the same class balance the trainer does.
SplitMatrix balance_validation(const SplitMatrix& validation, std::uint64_t seed);

// Per-round (or per-epoch) train/validation loss entries, one block per
// training stage, for the optional training-log dump.
struct TrainLog {
    struct Block {
        std::string stage;
        std::vector<TrainLogEntry> entries;
    };
    std::vector<Block> blocks;
};

ModelFile train_model(const SplitMatrix& train_balanced, const SplitMatrix& validation,
                      const TrainOptions& options, TrainLog* log = nullptr);

void write_train_log(const TrainLog& log, const std::string& path);

std::vector<Summary> summarize_corpus(const AdditiveModel& model,
                                      const std::vector<Document>& docs,
                                      const SummaryBudget& budget, std::size_t workers);

void write_summaries(const std::vector<Summary>& summaries, const std::string& path);
std::vector<Summary> read_summaries(const std::string& path);

// Shape tables + ranked importance files for a model over a dataset.
void export_explanations(const ModelFile& model, const std::vector<FeatureVector>& dataset,
                         const std::string& out_dir,
                         ImportanceStatistic stat = ImportanceStatistic::StdDev);

// The repeated-training protocol: undersampling and trainer seeds are
// re-derived per repeat, scores averaged.
struct RepeatResult {
    double mean_rouge1_f = 0.0;
    double mean_rouge2_f = 0.0;
    double mean_rougeL_f = 0.0;
    double mean_sentence_f1 = 0.0;
    std::size_t repeats = 0;
};
RepeatResult repeated_evaluation(const LabeledCorpus& lc, const CorpusSplit& split,
                                 const TrainOptions& options, const SummaryBudget& budget,
                                 std::size_t repeats, std::size_t workers);

} // namespace gamsum

#endif
