#ifndef GAMSUM_EVAL_HPP
#define GAMSUM_EVAL_HPP

#include <string>
#include <vector>

#include "gamsum/preprocess.hpp"
#include "gamsum/rouge.hpp"
#include "gamsum/summarize.hpp"

namespace gamsum {

struct DocumentRouge {
    std::string doc_id;
    RougeScore rouge1, rouge2, rougeL;
};

struct EvalReport {
    double mean_rouge1_f = 0.0;
    double mean_rouge2_f = 0.0;
    double mean_rougeL_f = 0.0;
    std::vector<DocumentRouge> per_document;
    bool has_sentence_f1 = false;
    double sentence_f1 = 0.0;
    bool empty_selection_notice = false;
};

// Per-document ROUGE of each summary against its document's reference,
// paired by id (mismatch is an error), arithmetic means across documents.
// Stemming inside ROUGE is off by default (reference-tool behavior); the
// flag exists for sensitivity checks.
EvalReport evaluate_rouge(const std::vector<Document>& docs,
                          const std::vector<Summary>& summaries, bool stem = false);

enum class F1Averaging { Micro, Macro };

// Sentence-selection F1 against oracle labels. Micro pools TP/FP/FN over
// all sentences; macro averages per-document F1.
double sentence_f1(const std::vector<Summary>& summaries,
                   const std::vector<Document>& docs,
                   const std::vector<std::vector<int>>& labels,
                   F1Averaging averaging = F1Averaging::Micro,
                   bool* zero_notice = nullptr);

std::string format_report(const EvalReport& report, bool per_document = false);

} // namespace gamsum

#endif
