#include "gamsum/gam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gamsum/error.hpp"

namespace gamsum {

namespace {

// Type-7 (linear interpolation) empirical quantile on sorted values.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = p * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

Binner Binner::fit(const std::vector<FeatureVector>& rows, std::size_t max_bins) {
    if (rows.empty()) throw ValidationError("Binner::fit: no rows");
    if (max_bins < 2) throw ValidationError("Binner::fit: max_bins must be >= 2");

    Binner b;
    b.cuts_.resize(kFeatureCount);
    b.min_.assign(kFeatureCount, 0.0);
    b.max_.assign(kFeatureCount, 0.0);

    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::vector<double> values(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) values[i] = rows[i][f];
        std::sort(values.begin(), values.end());
        b.min_[f] = values.front();
        b.max_[f] = values.back();

        std::vector<double> distinct;
        for (double v : values)
            if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

        std::vector<double> cuts;
        if (distinct.size() <= 1) {
            // constant feature: single bin
        } else if (distinct.size() <= max_bins) {
            for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
                cuts.push_back(0.5 * (distinct[i] + distinct[i + 1]));
        } else {
            for (std::size_t i = 1; i < max_bins; ++i) {
                double q = quantile_sorted(values,
                                           static_cast<double>(i) / static_cast<double>(max_bins));
                if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
            }
            // Merge away bins no training value falls into.
            for (bool changed = true; changed && !cuts.empty();) {
                changed = false;
                std::vector<std::size_t> histogram(cuts.size() + 1, 0);
                for (double v : values) {
                    std::size_t bin = static_cast<std::size_t>(
                        std::lower_bound(cuts.begin(), cuts.end(), v,
                                         [](double cut, double x) { return cut < x; }) -
                        cuts.begin());
                    ++histogram[bin];
                }
                for (std::size_t bin = 0; bin < histogram.size(); ++bin) {
                    if (histogram[bin] != 0) continue;
                    cuts.erase(cuts.begin() +
                               static_cast<std::ptrdiff_t>(bin == cuts.size() ? bin - 1 : bin));
                    changed = true;
                    break;
                }
            }
        }
        b.cuts_[f] = std::move(cuts);
    }
    return b;
}

std::size_t Binner::bin_index(std::size_t feature, double value) const {
    const std::vector<double>& cuts = cuts_[feature];
    return static_cast<std::size_t>(
        std::lower_bound(cuts.begin(), cuts.end(), value,
                         [](double cut, double x) { return cut < x; }) -
        cuts.begin());
}

std::pair<double, double> Binner::bin_edges(std::size_t feature, std::size_t bin) const {
    const std::vector<double>& cuts = cuts_[feature];
    double lo = bin == 0 ? min_[feature] : cuts[bin - 1];
    double hi = bin == cuts.size() ? max_[feature] : cuts[bin];
    return {lo, hi};
}

double Binner::bin_center(std::size_t feature, std::size_t bin) const {
    auto [lo, hi] = bin_edges(feature, bin);
    return 0.5 * (lo + hi);
}

void Binner::set_raw(std::vector<std::vector<double>> cuts, std::vector<double> min,
                     std::vector<double> max) {
    cuts_ = std::move(cuts);
    min_ = std::move(min);
    max_ = std::move(max);
}

void AdditiveModel::validate() const {
    for (std::size_t k = 0; k < mains.size(); ++k) {
        if (k > 0 && mains[k].feature <= mains[k - 1].feature)
            throw ValidationError("model: main shapes must have ascending unique feature ids");
        if (mains[k].contribution.size() != binner.bin_count(mains[k].feature))
            throw ValidationError("model: main shape bin count mismatch");
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const PairShape& p = pairs[k];
        if (p.feature_i >= p.feature_j)
            throw ValidationError("model: pair shapes require feature_i < feature_j");
        if (k > 0) {
            const PairShape& q = pairs[k - 1];
            if (std::pair(p.feature_i, p.feature_j) <= std::pair(q.feature_i, q.feature_j))
                throw ValidationError("model: pair shapes must be lexicographically sorted, unique");
        }
        if (p.contribution.size() != p.bins_i * p.bins_j)
            throw ValidationError("model: pair grid size mismatch");
        if (pair_binner.feature_count() == 0 ||
            p.bins_i != pair_binner.bin_count(p.feature_i) ||
            p.bins_j != pair_binner.bin_count(p.feature_j))
            throw ValidationError("model: pair grid does not match the pair binner");
    }
}

std::string TermContribution::name(const std::vector<std::string>& feature_names) const {
    switch (kind) {
    case Kind::Intercept:
        return "intercept";
    case Kind::Main:
        return feature_names[feature_i];
    default:
        return feature_names[feature_i] + " x " + feature_names[feature_j];
    }
}

std::string TermImportance::name(const std::vector<std::string>& feature_names) const {
    TermContribution t;
    t.kind = kind;
    t.feature_i = feature_i;
    t.feature_j = feature_j;
    return t.name(feature_names);
}

std::vector<TermContribution> decompose(const AdditiveModel& model, const FeatureVector& x) {
    std::vector<TermContribution> terms;
    terms.reserve(1 + model.mains.size() + model.pairs.size());
    terms.push_back({TermContribution::Kind::Intercept, 0, 0, model.intercept});
    for (const MainShape& m : model.mains) {
        std::size_t bin = model.binner.bin_index(m.feature, x[m.feature]);
        terms.push_back({TermContribution::Kind::Main, m.feature, 0, m.contribution[bin]});
    }
    for (const PairShape& p : model.pairs) {
        std::size_t bi = model.pair_binner.bin_index(p.feature_i, x[p.feature_i]);
        std::size_t bj = model.pair_binner.bin_index(p.feature_j, x[p.feature_j]);
        terms.push_back({TermContribution::Kind::Pair, p.feature_i, p.feature_j, p.at(bi, bj)});
    }
    return terms;
}

double predict_logit(const AdditiveModel& model, const FeatureVector& x) {
    // Same fixed order as decompose: intercept, mains, pairs.
    double logit = model.intercept;
    for (const MainShape& m : model.mains)
        logit += m.contribution[model.binner.bin_index(m.feature, x[m.feature])];
    for (const PairShape& p : model.pairs)
        logit += p.at(model.pair_binner.bin_index(p.feature_i, x[p.feature_i]),
                      model.pair_binner.bin_index(p.feature_j, x[p.feature_j]));
    return logit;
}

double logistic(double logit) {
    if (logit >= 0.0) {
        double e = std::exp(-logit);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(logit);
    return e / (1.0 + e);
}

double predict_proba(const AdditiveModel& model, const FeatureVector& x) {
    return logistic(predict_logit(model, x));
}

std::vector<TermImportance> importance_ratios(const AdditiveModel& model,
                                              const std::vector<FeatureVector>& dataset,
                                              ImportanceStatistic stat) {
    if (dataset.empty()) throw ValidationError("importance_ratios: empty dataset");

    const std::size_t term_count = model.mains.size() + model.pairs.size();
    std::vector<std::vector<double>> contributions(term_count,
                                                   std::vector<double>(dataset.size()));
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        std::vector<TermContribution> terms = decompose(model, dataset[r]);
        for (std::size_t t = 0; t < term_count; ++t)
            contributions[t][r] = terms[t + 1].value; // skip intercept
    }

    auto variation = [&](const std::vector<double>& c) {
        double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
        double acc = 0.0;
        for (double v : c) {
            double d = v - mean;
            acc += stat == ImportanceStatistic::StdDev ? d * d : std::fabs(d);
        }
        acc /= static_cast<double>(c.size());
        return stat == ImportanceStatistic::StdDev ? std::sqrt(acc) : acc;
    };

    std::vector<TermImportance> out(term_count);
    double total = 0.0;
    for (std::size_t t = 0; t < term_count; ++t) {
        TermImportance& imp = out[t];
        if (t < model.mains.size()) {
            imp.kind = TermContribution::Kind::Main;
            imp.feature_i = model.mains[t].feature;
        } else {
            const PairShape& p = model.pairs[t - model.mains.size()];
            imp.kind = TermContribution::Kind::Pair;
            imp.feature_i = p.feature_i;
            imp.feature_j = p.feature_j;
        }
        imp.ratio = variation(contributions[t]);
        total += imp.ratio;
    }
    if (total <= 0.0)
        throw TrainingError("importance_ratios: all terms have zero variation");
    for (TermImportance& imp : out) imp.ratio /= total;
    std::stable_sort(out.begin(), out.end(),
                     [](const TermImportance& a, const TermImportance& b) {
                         return a.ratio > b.ratio;
                     });
    return out;
}

std::vector<ShapeTable> export_shape_tables(const AdditiveModel& model) {
    std::vector<ShapeTable> tables;
    for (const MainShape& m : model.mains) {
        ShapeTable t;
        t.kind = TermContribution::Kind::Main;
        t.feature_i = m.feature;
        for (std::size_t b = 0; b < m.contribution.size(); ++b) {
            auto [lo, hi] = model.binner.bin_edges(m.feature, b);
            t.rows.push_back({lo, hi, model.binner.bin_center(m.feature, b), m.contribution[b]});
        }
        tables.push_back(std::move(t));
    }
    for (const PairShape& p : model.pairs) {
        ShapeTable t;
        t.kind = TermContribution::Kind::Pair;
        t.feature_i = p.feature_i;
        t.feature_j = p.feature_j;
        for (std::size_t b = 0; b < p.bins_i; ++b)
            t.edges_i.push_back(model.pair_binner.bin_edges(p.feature_i, b));
        for (std::size_t b = 0; b < p.bins_j; ++b)
            t.edges_j.push_back(model.pair_binner.bin_edges(p.feature_j, b));
        t.grid.assign(p.bins_i, std::vector<double>(p.bins_j, 0.0));
        for (std::size_t bi = 0; bi < p.bins_i; ++bi)
            for (std::size_t bj = 0; bj < p.bins_j; ++bj)
                t.grid[bi][bj] = p.at(bi, bj);
        tables.push_back(std::move(t));
    }
    return tables;
}

LogisticFit train_logistic(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                           const LogisticConfig& config) {
    if (x.empty() || x.size() != y.size())
        throw ValidationError("train_logistic: empty or mismatched training data");
    bool has_pos = false, has_neg = false;
    for (int label : y) (label == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw TrainingError("train_logistic: training data has a single class");

    const std::size_t n = x.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Fixed step from the logistic-loss Lipschitz bound on these rows.
    double max_row_norm2 = 0.0;
    for (const FeatureVector& row : x) {
        double norm2 = 1.0; // intercept column
        for (double v : row) norm2 += v * v;
        max_row_norm2 = std::max(max_row_norm2, norm2);
    }
    const double step = 4.0 / max_row_norm2;

    std::vector<double> w(kFeatureCount, 0.0);
    double bias = 0.0;
    double grad_norm = 0.0;
    std::size_t iter = 0;
    std::vector<double> grad(kFeatureCount, 0.0);
    for (; iter < config.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double logit = bias;
            for (std::size_t f = 0; f < kFeatureCount; ++f) logit += w[f] * x[i][f];
            double err = logistic(logit) - static_cast<double>(y[i]);
            grad_bias += err;
            for (std::size_t f = 0; f < kFeatureCount; ++f) grad[f] += err * x[i][f];
        }
        grad_bias *= inv_n;
        for (double& g : grad) g *= inv_n;

        grad_norm = std::fabs(grad_bias);
        for (double g : grad) grad_norm = std::max(grad_norm, std::fabs(g));
        if (grad_norm <= config.gradient_tolerance) break;

        bias -= step * grad_bias;
        for (std::size_t f = 0; f < kFeatureCount; ++f) w[f] -= step * grad[f];
    }

    LogisticFit fit;
    fit.coefficients.assign(w.begin(), w.end());
    fit.bias = bias;
    fit.converged = grad_norm <= config.gradient_tolerance;
    fit.gradient_norm = grad_norm;
    fit.iterations = iter;

    // Lay the linear model onto quantile bins: contribution = weight times
    // the in-bin training mean, centered, with the means folded into the
    // intercept.
    AdditiveModel& model = fit.model;
    model.binner = Binner::fit(x, config.max_bins);
    model.intercept = bias;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const std::size_t bins = model.binner.bin_count(f);
        std::vector<double> sum(bins, 0.0);
        std::vector<std::size_t> count(bins, 0);
        for (const FeatureVector& row : x) {
            std::size_t b = model.binner.bin_index(f, row[f]);
            sum[b] += row[f];
            ++count[b];
        }
        MainShape shape;
        shape.feature = f;
        shape.contribution.resize(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            double rep = count[b] > 0 ? sum[b] / static_cast<double>(count[b])
                                      : model.binner.bin_center(f, b);
            shape.contribution[b] = w[f] * rep;
        }
        double mean = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
            mean += shape.contribution[b] * static_cast<double>(count[b]);
        mean *= inv_n;
        for (double& v : shape.contribution) v -= mean;
        model.intercept += mean;
        model.mains.push_back(std::move(shape));
    }
    model.validate();
    return fit;
}

} // namespace gamsum
