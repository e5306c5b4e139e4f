// gamsum: interpretable extractive summarization with additive models.
//
// Subcommands: ingest, label, train, summarize, evaluate, explain. Every
// stage is deterministic under --seed, and --workers only changes wall
// time, never outputs. Exit codes: 0 ok, 1 data error, 2 usage error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "gamsum/error.hpp"
#include "gamsum/pipeline.hpp"
#include "gamsum/rng.hpp"

#ifndef GAMSUM_DEFAULT_DATA_DIR
#define GAMSUM_DEFAULT_DATA_DIR "data"
#endif

namespace {

using namespace gamsum;

struct CommonArgs {
    std::string data_dir = GAMSUM_DEFAULT_DATA_DIR;
    std::size_t workers = 1;
    std::uint64_t seed = 0;
};

std::vector<Document> load_and_preprocess(const std::string& corpus_path,
                                          const CommonArgs& common) {
    LanguageData lang = load_language_data(common.data_dir);
    std::vector<RawDocument> raw = load_corpus(corpus_path);
    return preprocess_corpus(raw, lang, common.workers);
}

std::vector<Document> filter_by_ids(const std::vector<Document>& docs,
                                    const std::vector<std::string>& ids) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<Document> out;
    for (const Document& d : docs)
        if (wanted.count(d.id)) out.push_back(d);
    return out;
}

LabeledCorpus build_labeled_corpus(const std::vector<Document>& docs,
                                   const LabelRows& rows) {
    LabeledCorpus lc;
    for (const Document& d : docs) {
        auto fit = rows.features.find(d.id);
        auto lit = rows.labels.find(d.id);
        if (fit == rows.features.end() || lit == rows.labels.end())
            throw ValidationError("labels file is missing document '" + d.id + "'");
        if (fit->second.size() != d.sentences.size())
            throw ValidationError("labels file row count does not match sentences of '" +
                                  d.id + "'");
        lc.docs.push_back(d);
        lc.features.push_back(fit->second);
        lc.labels.push_back(lit->second);
    }
    return lc;
}

int run(int argc, char** argv) {
    CLI::App app{"interpretable extractive summarization with additive models"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonArgs common;
    app.add_option("--data-dir", common.data_dir, "directory with bundled word lists")
        ->capture_default_str();
    app.add_option("--workers", common.workers, "worker threads for per-document stages")
        ->capture_default_str();
    app.add_option("--seed", common.seed, "root seed; all randomness derives from it")
        ->capture_default_str();

    // ingest: validate a corpus and write deterministic splits
    auto* ingest = app.add_subcommand("ingest", "validate a corpus and write splits");
    std::string in_corpus, out_splits;
    std::vector<double> ratios{0.8, 0.1, 0.1};
    ingest->add_option("--corpus", in_corpus, "corpus file (one JSON record per line)")
        ->required();
    ingest->add_option("--out", out_splits, "output split file")->required();
    ingest->add_option("--ratios", ratios, "train/validation/test fractions")
        ->expected(3);

    // label: oracle labels + feature dump
    auto* label = app.add_subcommand("label", "greedy oracle labels and feature dump");
    std::string label_corpus_path, label_out, label_budget = "sentences:3";
    label->add_option("--corpus", label_corpus_path, "corpus file")->required();
    label->add_option("--out", label_out, "output labels TSV")->required();
    label->add_option("--budget", label_budget, "labeling budget (sentences:K or words:W)")
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train a sentence classifier");
    std::string train_labels, train_splits, train_out, train_kind = "ebm";
    bool no_early_stop = false;
    EbmConfig ebm_defaults;
    GaminetConfig gaminet_defaults;
    train->add_option("--labels", train_labels, "labels TSV from `label`")->required();
    train->add_option("--splits", train_splits, "split file from `ingest`")->required();
    train->add_option("--model", train_kind, "ebm | gaminet | logistic")
        ->capture_default_str();
    train->add_option("--out", train_out, "output model file")->required();
    train->add_flag("--no-early-stop", no_early_stop,
                    "ignore the validation split while training");
    train->add_option("--rounds", ebm_defaults.rounds, "ebm: boosting rounds");
    train->add_option("--learning-rate", ebm_defaults.learning_rate, "ebm: learning rate");
    train->add_option("--bags", ebm_defaults.bag_count, "ebm: bag count");
    train->add_option("--interactions", ebm_defaults.interactions,
                      "pair terms kept (ebm and gaminet)");
    train->add_option("--max-bins", ebm_defaults.max_bins, "quantile bins for main effects");
    train->add_option("--epochs", gaminet_defaults.stage_epochs,
                      "gaminet: stage epochs (three values)")
        ->expected(3);
    train->add_option("--step-size", gaminet_defaults.step_size, "gaminet: step size");
    train->add_option("--tau", gaminet_defaults.prune_tau, "gaminet: pruning threshold");
    train->add_option("--clarity", gaminet_defaults.clarity_weight,
                      "gaminet: marginal clarity weight");
    std::string train_log_path;
    train->add_option("--log", train_log_path,
                      "write per-round train/validation loss as TSV");

    // summarize
    auto* summ = app.add_subcommand("summarize", "select summary sentences with a model");
    std::string summ_corpus, summ_model, summ_out, summ_budget = "sentences:3";
    std::string summ_splits, summ_split_name;
    summ->add_option("--corpus", summ_corpus, "corpus file")->required();
    summ->add_option("--model", summ_model, "model file from `train`")->required();
    summ->add_option("--out", summ_out, "output summaries file")->required();
    summ->add_option("--budget", summ_budget, "summary budget")->capture_default_str();
    summ->add_option("--splits", summ_splits, "optional split file to restrict documents");
    summ->add_option("--split", summ_split_name, "train | validation | test");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "ROUGE (and sentence F1) evaluation");
    std::string eval_corpus, eval_summaries, eval_labels, eval_out;
    std::string eval_model_kind, eval_splits, eval_budget = "sentences:3";
    std::size_t eval_repeats = 1;
    bool eval_per_doc = false, eval_macro_f1 = false;
    eval->add_option("--corpus", eval_corpus, "corpus file")->required();
    eval->add_option("--summaries", eval_summaries, "summaries file from `summarize`");
    eval->add_option("--labels", eval_labels, "labels TSV (enables sentence F1)");
    eval->add_option("--out", eval_out, "write the report here as well");
    eval->add_flag("--per-document", eval_per_doc, "include per-document breakdown");
    eval->add_flag("--macro-f1", eval_macro_f1, "macro-averaged sentence F1");
    bool eval_rouge_stem = false;
    eval->add_flag("--rouge-stem", eval_rouge_stem,
                   "stem inside ROUGE (sensitivity check; off by default)");
    eval->add_option("--model-kind", eval_model_kind,
                     "repeat mode: train this kind repeatedly and average");
    eval->add_option("--splits", eval_splits, "repeat mode: split file");
    eval->add_option("--repeats", eval_repeats, "repeat mode: number of runs")
        ->capture_default_str();
    eval->add_option("--budget", eval_budget, "repeat mode: summary budget")
        ->capture_default_str();

    // explain
    auto* explain = app.add_subcommand("explain", "export shape tables and importances");
    std::string explain_model, explain_corpus, explain_out_dir, explain_splits,
        explain_split_name;
    explain->add_option("--model", explain_model, "model file")->required();
    explain->add_option("--corpus", explain_corpus, "corpus providing the dataset")
        ->required();
    explain->add_option("--out-dir", explain_out_dir, "output directory")->required();
    explain->add_option("--splits", explain_splits, "optional split file");
    explain->add_option("--split", explain_split_name, "train | validation | test");
    std::string explain_stat = "std";
    explain->add_option("--importance-stat", explain_stat,
                        "importance statistic: std (default) or mad");

    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough(); // global flags may follow the subcommand name

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) {
            std::vector<Document> docs = load_and_preprocess(in_corpus, common);
            std::vector<std::string> ids;
            for (const Document& d : docs) ids.push_back(d.id);
            CorpusSplit split =
                split_corpus(ids, ratios[0], ratios[1], ratios[2], common.seed);
            save_split(split, out_splits);
            std::printf("ingested %zu documents: %zu train / %zu validation / %zu test\n",
                        ids.size(), split.train.size(), split.validation.size(),
                        split.test.size());
        } else if (*label) {
            std::vector<Document> docs = load_and_preprocess(label_corpus_path, common);
            SummaryBudget budget = SummaryBudget::parse(label_budget);
            LabeledCorpus lc;
            lc.docs = docs;
            lc.labels = label_corpus(docs, budget, common.workers);
            for (const Document& d : docs) lc.features.push_back(extract_features(d));
            write_labels_tsv(lc, label_out);
            std::size_t positives = 0, total = 0;
            for (const std::vector<int>& ls : lc.labels)
                for (int v : ls) {
                    positives += static_cast<std::size_t>(v);
                    ++total;
                }
            std::printf("labeled %zu sentences in %zu documents (%zu positive)\n", total,
                        docs.size(), positives);
        } else if (*train) {
            LabelRows rows = read_labels_tsv(train_labels);
            CorpusSplit split = load_split(train_splits);

            TrainOptions options;
            options.kind = model_kind_from_string(train_kind);
            options.seed = common.seed;
            options.use_validation = !no_early_stop && !split.validation.empty();
            options.ebm = ebm_defaults;
            options.gaminet = gaminet_defaults;
            options.gaminet.interactions = ebm_defaults.interactions;
            options.gaminet.max_bins = ebm_defaults.max_bins;

            TrainingSet set;
            for (const std::string& id : split.train) {
                auto fit = rows.features.find(id);
                auto lit = rows.labels.find(id);
                if (fit == rows.features.end() || lit == rows.labels.end())
                    throw ValidationError("labels file is missing document '" + id + "'");
                for (std::size_t s = 0; s < fit->second.size(); ++s) {
                    LabeledSentence sentence;
                    sentence.doc_id = id;
                    sentence.sentence_index = s;
                    sentence.features = fit->second[s];
                    sentence.label = lit->second[s];
                    set.rows.push_back(std::move(sentence));
                }
            }
            TrainingSet balanced =
                undersample(set, derive_seed(common.seed, "train-undersample"));
            SplitMatrix train_matrix;
            for (const LabeledSentence& s : balanced.rows) {
                train_matrix.x.push_back(s.features);
                train_matrix.y.push_back(s.label);
            }
            SplitMatrix validation = balance_validation(
                gather_split(rows, split.validation),
                derive_seed(common.seed, "train-val-undersample"));

            TrainLog train_log;
            ModelFile model = train_model(train_matrix, validation, options,
                                          train_log_path.empty() ? nullptr : &train_log);
            if (!train_log_path.empty()) write_train_log(train_log, train_log_path);
            save_model(model, train_out);
            std::printf("trained %s on %zu balanced rows -> %s\n", train_kind.c_str(),
                        balanced.rows.size(), train_out.c_str());
        } else if (*summ) {
            std::vector<Document> docs = load_and_preprocess(summ_corpus, common);
            if (!summ_splits.empty() && !summ_split_name.empty()) {
                CorpusSplit split = load_split(summ_splits);
                const std::vector<std::string>* ids = nullptr;
                if (summ_split_name == "train") ids = &split.train;
                else if (summ_split_name == "validation") ids = &split.validation;
                else if (summ_split_name == "test") ids = &split.test;
                else throw ValidationError("unknown split name '" + summ_split_name + "'");
                docs = filter_by_ids(docs, *ids);
            }
            ModelFile model = load_model(summ_model);
            SummaryBudget budget = SummaryBudget::parse(summ_budget);
            std::vector<Summary> summaries =
                summarize_corpus(model.model, docs, budget, common.workers);
            write_summaries(summaries, summ_out);
            std::printf("summarized %zu documents -> %s\n", docs.size(), summ_out.c_str());
        } else if (*eval) {
            std::vector<Document> docs = load_and_preprocess(eval_corpus, common);
            if (!eval_model_kind.empty()) {
                // repeat mode: train/test N times with per-repeat seeds
                if (eval_labels.empty() || eval_splits.empty())
                    throw ValidationError(
                        "repeat mode needs --labels and --splits alongside --model-kind");
                LabelRows rows = read_labels_tsv(eval_labels);
                LabeledCorpus lc = build_labeled_corpus(docs, rows);
                CorpusSplit split = load_split(eval_splits);
                TrainOptions options;
                options.kind = model_kind_from_string(eval_model_kind);
                options.seed = common.seed;
                RepeatResult rr =
                    repeated_evaluation(lc, split, options, SummaryBudget::parse(eval_budget),
                                        eval_repeats, common.workers);
                std::printf("repeats %zu (%s)\n", rr.repeats, eval_model_kind.c_str());
                std::printf("mean ROUGE-1 F (%%) %.2f\n", 100.0 * rr.mean_rouge1_f);
                std::printf("mean ROUGE-2 F (%%) %.2f\n", 100.0 * rr.mean_rouge2_f);
                std::printf("mean ROUGE-L F (%%) %.2f\n", 100.0 * rr.mean_rougeL_f);
                std::printf("mean F1 (%%)        %.2f\n", 100.0 * rr.mean_sentence_f1);
            } else {
                if (eval_summaries.empty())
                    throw ValidationError("evaluate needs --summaries (or repeat mode)");
                std::vector<Summary> summaries = read_summaries(eval_summaries);
                std::set<std::string> summarized;
                for (const Summary& s : summaries) summarized.insert(s.doc_id);
                std::vector<Document> evaluated;
                for (const Document& d : docs)
                    if (summarized.count(d.id)) evaluated.push_back(d);
                EvalReport report = evaluate_rouge(evaluated, summaries, eval_rouge_stem);
                if (!eval_labels.empty()) {
                    LabelRows rows = read_labels_tsv(eval_labels);
                    LabeledCorpus lc = build_labeled_corpus(evaluated, rows);
                    report.has_sentence_f1 = true;
                    report.sentence_f1 = sentence_f1(
                        summaries, lc.docs, lc.labels,
                        eval_macro_f1 ? F1Averaging::Macro : F1Averaging::Micro,
                        &report.empty_selection_notice);
                }
                std::string text = format_report(report, eval_per_doc);
                std::fputs(text.c_str(), stdout);
                if (report.empty_selection_notice)
                    std::fputs("note: nothing selected and no positive labels\n", stdout);
                if (!eval_out.empty()) {
                    std::ofstream out(eval_out, std::ios::binary);
                    if (!out) throw DataError("cannot write report: " + eval_out);
                    if (eval_out.size() > 5 &&
                        eval_out.compare(eval_out.size() - 5, 5, ".json") == 0) {
                        nlohmann::ordered_json j;
                        j["rouge1_f"] = report.mean_rouge1_f;
                        j["rouge2_f"] = report.mean_rouge2_f;
                        j["rougeL_f"] = report.mean_rougeL_f;
                        if (report.has_sentence_f1) j["sentence_f1"] = report.sentence_f1;
                        j["per_document"] = nlohmann::ordered_json::array();
                        for (const DocumentRouge& dr : report.per_document) {
                            nlohmann::ordered_json row;
                            row["id"] = dr.doc_id;
                            row["rouge1_f"] = dr.rouge1.f1;
                            row["rouge2_f"] = dr.rouge2.f1;
                            row["rougeL_f"] = dr.rougeL.f1;
                            j["per_document"].push_back(row);
                        }
                        out << j.dump(2) << "\n";
                    } else {
                        out << text;
                    }
                }
            }
        } else if (*explain) {
            ModelFile model = load_model(explain_model);
            std::vector<Document> docs = load_and_preprocess(explain_corpus, common);
            if (!explain_splits.empty() && !explain_split_name.empty()) {
                CorpusSplit split = load_split(explain_splits);
                const std::vector<std::string>* ids = nullptr;
                if (explain_split_name == "train") ids = &split.train;
                else if (explain_split_name == "validation") ids = &split.validation;
                else if (explain_split_name == "test") ids = &split.test;
                else throw ValidationError("unknown split name '" + explain_split_name + "'");
                docs = filter_by_ids(docs, *ids);
            }
            std::vector<FeatureVector> dataset;
            for (const Document& d : docs)
                for (const FeatureVector& row : extract_features(d)) dataset.push_back(row);
            ImportanceStatistic stat;
            if (explain_stat == "std") stat = ImportanceStatistic::StdDev;
            else if (explain_stat == "mad") stat = ImportanceStatistic::MeanAbsDev;
            else throw ValidationError("unknown importance statistic '" + explain_stat + "'");
            export_explanations(model, dataset, explain_out_dir, stat);
            std::printf("wrote %zu shape tables + importance ranking to %s\n",
                        model.model.mains.size() + model.model.pairs.size(),
                        explain_out_dir.c_str());
        }
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
