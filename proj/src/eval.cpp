#include "gamsum/eval.hpp"

#include <cstdio>
#include <map>

#include "gamsum/error.hpp"

namespace gamsum {

namespace {

std::vector<TokenList> tokenize_sentences(const std::vector<std::string>& sentences,
                                          bool stem) {
    std::vector<TokenList> out;
    for (const std::string& s : sentences) out.push_back(rouge_tokenize(s, stem));
    return out;
}

} // namespace

EvalReport evaluate_rouge(const std::vector<Document>& docs,
                          const std::vector<Summary>& summaries, bool stem) {
    std::map<std::string, const Document*> by_id;
    for (const Document& d : docs) by_id[d.id] = &d;
    if (summaries.empty()) throw ValidationError("evaluate_rouge: no summaries");

    EvalReport report;
    for (const Summary& s : summaries) {
        auto it = by_id.find(s.doc_id);
        if (it == by_id.end())
            throw ValidationError("evaluate_rouge: summary for unknown document '" + s.doc_id +
                                  "'");
        const Document& doc = *it->second;

        std::vector<std::string> selected;
        for (std::size_t idx : s.indices) {
            if (idx >= doc.sentences.size())
                throw ValidationError("evaluate_rouge: sentence index out of range for '" +
                                      s.doc_id + "'");
            selected.push_back(doc.sentences[idx].raw);
        }
        std::vector<TokenList> cand = tokenize_sentences(selected, stem);
        std::vector<TokenList> ref = tokenize_sentences(doc.raw_reference, stem);

        DocumentRouge dr;
        dr.doc_id = s.doc_id;
        dr.rouge1 = rouge_n(cand, ref, 1);
        dr.rouge2 = rouge_n(cand, ref, 2);
        dr.rougeL = rouge_l(cand, ref);
        report.mean_rouge1_f += dr.rouge1.f1;
        report.mean_rouge2_f += dr.rouge2.f1;
        report.mean_rougeL_f += dr.rougeL.f1;
        report.per_document.push_back(std::move(dr));
    }
    const double n = static_cast<double>(report.per_document.size());
    report.mean_rouge1_f /= n;
    report.mean_rouge2_f /= n;
    report.mean_rougeL_f /= n;
    return report;
}

double sentence_f1(const std::vector<Summary>& summaries, const std::vector<Document>& docs,
                   const std::vector<std::vector<int>>& labels, F1Averaging averaging,
                   bool* zero_notice) {
    if (docs.size() != labels.size())
        throw ValidationError("sentence_f1: labels must cover every evaluated document");
    std::map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < docs.size(); ++i) doc_index[docs[i].id] = i;

    double tp = 0.0, fp = 0.0, fn = 0.0;
    double macro_sum = 0.0;
    for (const Summary& s : summaries) {
        auto it = doc_index.find(s.doc_id);
        if (it == doc_index.end())
            throw ValidationError("sentence_f1: no labels for document '" + s.doc_id + "'");
        const std::vector<int>& label = labels[it->second];

        double dtp = 0.0, dfp = 0.0, dfn = 0.0;
        std::vector<char> selected(label.size(), 0);
        for (std::size_t idx : s.indices)
            if (idx < selected.size()) selected[idx] = 1;
        for (std::size_t i = 0; i < label.size(); ++i) {
            if (selected[i] && label[i] == 1) dtp += 1.0;
            else if (selected[i]) dfp += 1.0;
            else if (label[i] == 1) dfn += 1.0;
        }
        tp += dtp;
        fp += dfp;
        fn += dfn;
        double dp = dtp + dfp > 0.0 ? dtp / (dtp + dfp) : 0.0;
        double drc = dtp + dfn > 0.0 ? dtp / (dtp + dfn) : 0.0;
        macro_sum += dp + drc > 0.0 ? 2.0 * dp * drc / (dp + drc) : 0.0;
    }

    if (averaging == F1Averaging::Macro)
        return summaries.empty() ? 0.0 : macro_sum / static_cast<double>(summaries.size());

    if (tp + fp == 0.0 && tp + fn == 0.0) {
        // nothing selected and nothing positive: defined as 0 with notice
        if (zero_notice) *zero_notice = true;
        return 0.0;
    }
    double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::string format_report(const EvalReport& report, bool per_document) {
    char buf[256];
    std::string out;
    out += "metric        value\n";
    std::snprintf(buf, sizeof(buf), "ROUGE-1 F (%%) %6.2f\n", 100.0 * report.mean_rouge1_f);
    out += buf;
    std::snprintf(buf, sizeof(buf), "ROUGE-2 F (%%) %6.2f\n", 100.0 * report.mean_rouge2_f);
    out += buf;
    std::snprintf(buf, sizeof(buf), "ROUGE-L F (%%) %6.2f\n", 100.0 * report.mean_rougeL_f);
    out += buf;
    if (report.has_sentence_f1) {
        std::snprintf(buf, sizeof(buf), "F1 (%%)        %6.2f\n", 100.0 * report.sentence_f1);
        out += buf;
    }
    if (per_document) {
        out += "doc_id\trouge1_f\trouge2_f\trougeL_f\n";
        for (const DocumentRouge& dr : report.per_document) {
            std::snprintf(buf, sizeof(buf), "%s\t%.4f\t%.4f\t%.4f\n", dr.doc_id.c_str(),
                          dr.rouge1.f1, dr.rouge2.f1, dr.rougeL.f1);
            out += buf;
        }
    }
    return out;
}

} // namespace gamsum
