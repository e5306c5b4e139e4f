#include "gamsum/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"

namespace gamsum {

namespace {

constexpr double kHessEps = 1e-12;
constexpr double kGainEps = 1e-12;
// Splits must leave this many samples on each side; on desk-scale data the
// per-bin Newton estimates are far too noisy without it.
constexpr double kMinLeafSamples = 4.0;

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

double logloss_of_logits(const std::vector<double>& logits, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        total += softplus(logits[i]) - static_cast<double>(y[i]) * logits[i];
    return total / static_cast<double>(logits.size());
}

struct BinnedFeatures {
    std::vector<std::vector<std::uint16_t>> by_feature; // [feature][sample]
};

BinnedFeatures bin_rows(const Binner& binner, const std::vector<FeatureVector>& rows) {
    BinnedFeatures out;
    out.by_feature.assign(kFeatureCount, {});
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        out.by_feature[f].resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            out.by_feature[f][i] = static_cast<std::uint16_t>(binner.bin_index(f, rows[i][f]));
    }
    return out;
}

double newton_value(double sum_g, double sum_h) { return sum_g / (sum_h + kHessEps); }
double newton_score(double sum_g, double sum_h) { return sum_g * sum_g / (sum_h + kHessEps); }

// Greedy CART over the ordered bin axis, at most max_leaves segments.
// Returns per-bin Newton leaf values.
std::vector<double> fit_tree_1d(const std::vector<double>& g, const std::vector<double>& h,
                                const std::vector<double>& n, std::size_t max_leaves) {
    const std::size_t bins = g.size();
    struct Segment {
        std::size_t lo, hi; // [lo, hi)
    };
    std::vector<Segment> leaves{{0, bins}};

    std::vector<double> pg(bins + 1, 0.0), ph(bins + 1, 0.0), pn(bins + 1, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        pg[b + 1] = pg[b] + g[b];
        ph[b + 1] = ph[b] + h[b];
        pn[b + 1] = pn[b] + n[b];
    }
    auto seg_g = [&](const Segment& s) { return pg[s.hi] - pg[s.lo]; };
    auto seg_h = [&](const Segment& s) { return ph[s.hi] - ph[s.lo]; };

    while (leaves.size() < max_leaves) {
        double best_gain = 0.0;
        std::size_t best_leaf = leaves.size();
        std::size_t best_cut = 0;
        for (std::size_t l = 0; l < leaves.size(); ++l) {
            const Segment& s = leaves[l];
            if (s.hi - s.lo < 2) continue;
            double parent = newton_score(seg_g(s), seg_h(s));
            for (std::size_t cut = s.lo + 1; cut < s.hi; ++cut) {
                double nl = pn[cut] - pn[s.lo], nr = pn[s.hi] - pn[cut];
                if (nl < kMinLeafSamples || nr < kMinLeafSamples) continue;
                double gl = pg[cut] - pg[s.lo], hl = ph[cut] - ph[s.lo];
                double gr = pg[s.hi] - pg[cut], hr = ph[s.hi] - ph[cut];
                double gain = newton_score(gl, hl) + newton_score(gr, hr) - parent;
                if (gain > best_gain + kGainEps) {
                    best_gain = gain;
                    best_leaf = l;
                    best_cut = cut;
                }
            }
        }
        if (best_leaf == leaves.size()) break;
        Segment right{best_cut, leaves[best_leaf].hi};
        leaves[best_leaf].hi = best_cut;
        leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(best_leaf) + 1, right);
    }

    std::vector<double> values(bins, 0.0);
    for (const Segment& s : leaves) {
        double v = newton_value(seg_g(s), seg_h(s));
        for (std::size_t b = s.lo; b < s.hi; ++b) values[b] = v;
    }
    return values;
}

// Four-quadrant Newton tree on a 2-D grid (one cut per axis); single-bin
// axes stay unsplit.
std::vector<double> fit_tree_quadrant(const std::vector<double>& g, const std::vector<double>& h,
                                      const std::vector<double>& n, std::size_t rows,
                                      std::size_t cols) {
    std::vector<double> pg((rows + 1) * (cols + 1), 0.0), ph((rows + 1) * (cols + 1), 0.0),
        pn((rows + 1) * (cols + 1), 0.0);
    auto at = [cols](std::size_t r, std::size_t c) { return r * (cols + 1) + c; };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            pg[at(r + 1, c + 1)] =
                g[r * cols + c] + pg[at(r, c + 1)] + pg[at(r + 1, c)] - pg[at(r, c)];
            ph[at(r + 1, c + 1)] =
                h[r * cols + c] + ph[at(r, c + 1)] + ph[at(r + 1, c)] - ph[at(r, c)];
            pn[at(r + 1, c + 1)] =
                n[r * cols + c] + pn[at(r, c + 1)] + pn[at(r + 1, c)] - pn[at(r, c)];
        }
    auto rect = [&](const std::vector<double>& p, std::size_t r0, std::size_t r1, std::size_t c0,
                    std::size_t c1) {
        return p[at(r1, c1)] - p[at(r0, c1)] - p[at(r1, c0)] + p[at(r0, c0)];
    };

    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best_ri = rows, best_cj = cols; // boundary == dim means "no cut"
    std::vector<std::size_t> row_cuts, col_cuts;
    for (std::size_t r = 1; r < rows; ++r) row_cuts.push_back(r);
    if (row_cuts.empty()) row_cuts.push_back(rows);
    for (std::size_t c = 1; c < cols; ++c) col_cuts.push_back(c);
    if (col_cuts.empty()) col_cuts.push_back(cols);

    for (std::size_t ri : row_cuts) {
        for (std::size_t cj : col_cuts) {
            double score = 0.0;
            double smallest = std::numeric_limits<double>::infinity();
            for (int q = 0; q < 4; ++q) {
                std::size_t r0 = (q & 1) ? ri : 0, r1 = (q & 1) ? rows : ri;
                std::size_t c0 = (q & 2) ? cj : 0, c1 = (q & 2) ? cols : cj;
                if (r0 >= r1 || c0 >= c1) continue;
                smallest = std::min(smallest, rect(pn, r0, r1, c0, c1));
                score += newton_score(rect(pg, r0, r1, c0, c1), rect(ph, r0, r1, c0, c1));
            }
            if (smallest < kMinLeafSamples && (ri < rows || cj < cols)) continue;
            if (score > best_score) {
                best_score = score;
                best_ri = ri;
                best_cj = cj;
            }
        }
    }

    std::vector<double> values(rows * cols, 0.0);
    for (int q = 0; q < 4; ++q) {
        std::size_t r0 = (q & 1) ? best_ri : 0, r1 = (q & 1) ? rows : best_ri;
        std::size_t c0 = (q & 2) ? best_cj : 0, c1 = (q & 2) ? cols : best_cj;
        if (r0 >= r1 || c0 >= c1) continue;
        double v = newton_value(rect(pg, r0, r1, c0, c1), rect(ph, r0, r1, c0, c1));
        for (std::size_t r = r0; r < r1; ++r)
            for (std::size_t c = c0; c < c1; ++c) values[r * cols + c] = v;
    }
    return values;
}

// Random-cut variant used in the smoothing phase: cut positions are drawn
// uniformly among positions honoring the leaf minimum, only the leaf
// values come from the residuals. Early rounds built this way keep shapes
// smooth instead of chasing the strongest residual noise.
std::vector<double> fit_tree_1d_random(const std::vector<double>& g,
                                       const std::vector<double>& h,
                                       const std::vector<double>& n,
                                       std::size_t max_leaves, Rng& rng) {
    const std::size_t bins = g.size();
    std::vector<double> pg(bins + 1, 0.0), ph(bins + 1, 0.0), pn(bins + 1, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        pg[b + 1] = pg[b] + g[b];
        ph[b + 1] = ph[b] + h[b];
        pn[b + 1] = pn[b] + n[b];
    }
    std::vector<std::size_t> valid;
    for (std::size_t cut = 1; cut < bins; ++cut)
        if (pn[cut] >= kMinLeafSamples && pn[bins] - pn[cut] >= kMinLeafSamples)
            valid.push_back(cut);

    std::vector<std::size_t> cuts;
    std::size_t want = max_leaves - 1;
    for (std::size_t k = 0; k < want && !valid.empty(); ++k) {
        std::size_t pick = static_cast<std::size_t>(rng.below(valid.size()));
        cuts.push_back(valid[pick]);
        valid.erase(valid.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(bins);

    std::vector<double> values(bins, 0.0);
    std::size_t lo = 0;
    for (std::size_t cut : cuts) {
        double v = newton_value(pg[cut] - pg[lo], ph[cut] - ph[lo]);
        for (std::size_t b = lo; b < cut; ++b) values[b] = v;
        lo = cut;
    }
    return values;
}

std::vector<std::vector<std::size_t>> make_bags(std::size_t n, const EbmConfig& config) {
    std::vector<std::vector<std::size_t>> bags(config.bag_count);
    std::size_t bag_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.bag_fraction *
                                                          static_cast<double>(n)));
    bag_size = std::min(bag_size, n);
    for (std::size_t b = 0; b < config.bag_count; ++b) {
        if (bag_size == n) {
            bags[b].resize(n);
            for (std::size_t i = 0; i < n; ++i) bags[b][i] = i;
            continue;
        }
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        Rng rng(derive_seed(config.seed, "ebm-bag", b));
        rng.shuffle(idx);
        idx.resize(bag_size);
        std::sort(idx.begin(), idx.end());
        bags[b] = std::move(idx);
    }
    return bags;
}

double base_rate_logit(const std::vector<int>& y) {
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    std::size_t neg = y.size() - pos;
    if (pos == 0 || neg == 0)
        throw TrainingError("ebm: training data has a single class");
    return std::log(static_cast<double>(pos) / static_cast<double>(neg));
}

// Weighted (training-distribution) centering: per-term means move into the
// intercept.
void center_mains(AdditiveModel& model, const BinnedFeatures& train_bins, std::size_t n) {
    for (MainShape& m : model.mains) {
        std::vector<std::size_t> counts(m.contribution.size(), 0);
        for (std::uint16_t b : train_bins.by_feature[m.feature]) ++counts[b];
        double mean = 0.0;
        for (std::size_t b = 0; b < m.contribution.size(); ++b)
            mean += m.contribution[b] * static_cast<double>(counts[b]);
        mean /= static_cast<double>(n);
        for (double& v : m.contribution) v -= mean;
        model.intercept += mean;
    }
}

void center_pairs(AdditiveModel& model, const BinnedFeatures& pair_bins, std::size_t n) {
    for (PairShape& p : model.pairs) {
        std::vector<std::size_t> counts(p.contribution.size(), 0);
        for (std::size_t i = 0; i < n; ++i)
            ++counts[pair_bins.by_feature[p.feature_i][i] * p.bins_j +
                     pair_bins.by_feature[p.feature_j][i]];
        double mean = 0.0;
        for (std::size_t c = 0; c < p.contribution.size(); ++c)
            mean += p.contribution[c] * static_cast<double>(counts[c]);
        mean /= static_cast<double>(n);
        for (double& v : p.contribution) v -= mean;
        model.intercept += mean;
    }
}

} // namespace

void EbmConfig::validate() const {
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw ValidationError("ebm config: learning rate must be in (0, 1]");
    if (bag_count < 1) throw ValidationError("ebm config: bag count must be >= 1");
    if (bag_fraction <= 0.0 || bag_fraction > 1.0)
        throw ValidationError("ebm config: bag fraction must be in (0, 1]");
    if (max_bins < 2 || pair_max_bins < 2)
        throw ValidationError("ebm config: bin counts must be >= 2");
    if (max_leaves < 2) throw ValidationError("ebm config: max leaves must be >= 2");
}

double mean_logloss(const AdditiveModel& model, const std::vector<FeatureVector>& x,
                    const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = predict_logit(model, x[i]);
        total += softplus(z) - static_cast<double>(y[i]) * z;
    }
    return total / static_cast<double>(x.size());
}

AdditiveModel train_main_effects(const std::vector<FeatureVector>& x_train,
                                 const std::vector<int>& y_train,
                                 const std::vector<FeatureVector>& x_val,
                                 const std::vector<int>& y_val,
                                 const EbmConfig& config, EbmReport* report) {
    config.validate();
    if (x_train.empty() || x_train.size() != y_train.size())
        throw ValidationError("ebm: empty or mismatched training data");

    const std::size_t n = x_train.size();
    const double intercept0 = base_rate_logit(y_train);

    AdditiveModel model;
    model.binner = Binner::fit(x_train, config.max_bins);
    model.intercept = intercept0;

    BinnedFeatures train_bins = bin_rows(model.binner, x_train);
    BinnedFeatures val_bins = bin_rows(model.binner, x_val);

    std::vector<std::vector<std::size_t>> bags = make_bags(n, config);
    const std::size_t B = config.bag_count;

    // Per-bag boosting state. Each bag early-stops on its own held-out
    // rows (the out-of-bag remainder of the subsample); the provided
    // validation set is a fallback when the bag covers everything.
    std::vector<std::vector<std::vector<double>>> shapes(B), best_shapes(B);
    std::vector<std::vector<double>> logits(B);
    std::vector<std::vector<std::size_t>> oob(B);
    std::vector<std::vector<double>> oob_logits(B);
    std::vector<double> best_holdout(B, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> bag_best_round(B, 0);
    std::vector<char> active(B, 1);
    for (std::size_t b = 0; b < B; ++b) {
        shapes[b].resize(kFeatureCount);
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            shapes[b][f].assign(model.binner.bin_count(f), 0.0);
        best_shapes[b] = shapes[b];
        logits[b].assign(bags[b].size(), intercept0);
        std::vector<char> in_bag(n, 0);
        for (std::size_t i : bags[b]) in_bag[i] = 1;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i]) oob[b].push_back(i);
        oob_logits[b].assign(oob[b].size(), intercept0);
    }

    const bool has_val = !x_val.empty();
    std::vector<std::vector<double>> val_logits(B);
    for (std::size_t b = 0; b < B; ++b) val_logits[b].assign(x_val.size(), intercept0);

    // First half of the budget (at most 200 rounds) uses randomly placed
    // cuts; greedy split search takes over afterwards.
    const std::size_t smoothing_rounds = std::min<std::size_t>(config.rounds / 2, 200);
    std::vector<Rng> smooth_rng;
    for (std::size_t b = 0; b < B; ++b)
        smooth_rng.emplace_back(derive_seed(config.seed, "ebm-smoothing", b));

    // Holdout for a bag: its out-of-bag rows, else the provided validation
    // set, else nothing (no early stopping).
    auto bag_holdout_logloss = [&](std::size_t b) {
        if (!oob[b].empty()) {
            double total = 0.0;
            for (std::size_t k = 0; k < oob[b].size(); ++k) {
                double z = oob_logits[b][k];
                total += softplus(z) - static_cast<double>(y_train[oob[b][k]]) * z;
            }
            return total / static_cast<double>(oob[b].size());
        }
        if (has_val) return logloss_of_logits(val_logits[b], y_val);
        return std::numeric_limits<double>::quiet_NaN();
    };
    // The unboosted state competes too: a bag that never improves on it
    // contributes empty shapes.
    for (std::size_t b = 0; b < B; ++b) {
        double baseline = bag_holdout_logloss(b);
        if (!std::isnan(baseline)) best_holdout[b] = baseline;
    }

    auto averaged_shapes = [&](const std::vector<std::vector<std::vector<double>>>& source) {
        std::vector<std::vector<double>> avg(kFeatureCount);
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            avg[f].assign(model.binner.bin_count(f), 0.0);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t k = 0; k < avg[f].size(); ++k)
                    avg[f][k] += source[b][f][k];
            for (double& v : avg[f]) v /= static_cast<double>(B);
        }
        return avg;
    };
    auto eval_logloss = [&](const std::vector<std::vector<double>>& avg,
                            const BinnedFeatures& bins, const std::vector<int>& y) {
        std::vector<double> z(y.size(), intercept0);
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            for (std::size_t i = 0; i < y.size(); ++i) z[i] += avg[f][bins.by_feature[f][i]];
        return logloss_of_logits(z, y);
    };

    std::size_t last_round = 0;
    std::vector<double> g, h, cnt, delta;
    for (std::size_t round = 1; round <= config.rounds; ++round) {
        bool any_active = false;
        for (std::size_t b = 0; b < B; ++b) {
            if (!active[b]) continue;
            any_active = true;
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                const std::size_t bins = model.binner.bin_count(f);
                g.assign(bins, 0.0);
                h.assign(bins, 0.0);
                cnt.assign(bins, 0.0);
                const std::vector<std::size_t>& bag = bags[b];
                for (std::size_t k = 0; k < bag.size(); ++k) {
                    std::size_t i = bag[k];
                    double p = logistic(logits[b][k]);
                    std::uint16_t bin = train_bins.by_feature[f][i];
                    g[bin] += static_cast<double>(y_train[i]) - p;
                    h[bin] += p * (1.0 - p);
                    cnt[bin] += 1.0;
                }
                delta = round <= smoothing_rounds
                            ? fit_tree_1d_random(g, h, cnt, config.max_leaves, smooth_rng[b])
                            : fit_tree_1d(g, h, cnt, config.max_leaves);
                for (double& v : delta) v *= config.learning_rate;
                for (std::size_t k = 0; k < bins; ++k) shapes[b][f][k] += delta[k];
                for (std::size_t k = 0; k < bag.size(); ++k)
                    logits[b][k] += delta[train_bins.by_feature[f][bag[k]]];
                for (std::size_t k = 0; k < oob[b].size(); ++k)
                    oob_logits[b][k] += delta[train_bins.by_feature[f][oob[b][k]]];
                for (std::size_t k = 0; k < x_val.size(); ++k)
                    val_logits[b][k] += delta[val_bins.by_feature[f][k]];
            }

            double holdout = bag_holdout_logloss(b);
            if (std::isnan(holdout)) {
                best_shapes[b] = shapes[b];
                bag_best_round[b] = round;
            } else if (holdout < best_holdout[b] - 1e-12) {
                best_holdout[b] = holdout;
                bag_best_round[b] = round;
                best_shapes[b] = shapes[b];
            } else if (round > smoothing_rounds &&
                       round - std::max(bag_best_round[b], smoothing_rounds) >=
                           config.patience) {
                active[b] = 0;
            }
        }
        if (!any_active) break;
        last_round = round;

        if (report) {
            std::vector<std::vector<double>> avg = averaged_shapes(shapes);
            TrainLogEntry entry;
            entry.round = round;
            entry.train_logloss = eval_logloss(avg, train_bins, y_train);
            entry.val_logloss = has_val ? eval_logloss(avg, val_bins, y_val)
                                        : std::numeric_limits<double>::quiet_NaN();
            report->mains_log.push_back(entry);
        }
    }

    std::vector<std::vector<double>> final_shapes = averaged_shapes(best_shapes);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        MainShape m;
        m.feature = f;
        m.contribution = final_shapes[f];
        model.mains.push_back(std::move(m));
    }
    center_mains(model, train_bins, n);
    model.validate();
    if (report) {
        report->mains_best_round = last_round;
        report->mains_val_logloss =
            has_val ? mean_logloss(model, x_val, y_val) : std::numeric_limits<double>::quiet_NaN();
    }
    return model;
}

std::vector<InteractionCandidate> rank_interactions_on_residuals(
    const Binner& pair_binner, const std::vector<FeatureVector>& x,
    const std::vector<double>& residuals) {
    const std::size_t n = x.size();
    BinnedFeatures bins = bin_rows(pair_binner, x);

    std::vector<InteractionCandidate> out;
    for (std::size_t fi = 0; fi < kFeatureCount; ++fi) {
        for (std::size_t fj = fi + 1; fj < kFeatureCount; ++fj) {
            const std::size_t rows = pair_binner.bin_count(fi);
            const std::size_t cols = pair_binner.bin_count(fj);

            std::vector<double> cnt((rows + 1) * (cols + 1), 0.0);
            std::vector<double> sum((rows + 1) * (cols + 1), 0.0);
            std::vector<double> sumsq((rows + 1) * (cols + 1), 0.0);
            auto at = [cols](std::size_t r, std::size_t c) { return r * (cols + 1) + c; };
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t r = bins.by_feature[fi][i] + 1;
                std::size_t c = bins.by_feature[fj][i] + 1;
                cnt[at(r, c)] += 1.0;
                sum[at(r, c)] += residuals[i];
                sumsq[at(r, c)] += residuals[i] * residuals[i];
            }
            for (std::size_t r = 1; r <= rows; ++r)
                for (std::size_t c = 1; c <= cols; ++c) {
                    cnt[at(r, c)] += cnt[at(r - 1, c)] + cnt[at(r, c - 1)] - cnt[at(r - 1, c - 1)];
                    sum[at(r, c)] += sum[at(r - 1, c)] + sum[at(r, c - 1)] - sum[at(r - 1, c - 1)];
                    sumsq[at(r, c)] +=
                        sumsq[at(r - 1, c)] + sumsq[at(r, c - 1)] - sumsq[at(r - 1, c - 1)];
                }
            auto rect = [&](const std::vector<double>& p, std::size_t r0, std::size_t r1,
                            std::size_t c0, std::size_t c1) {
                return p[at(r1, c1)] - p[at(r0, c1)] - p[at(r1, c0)] + p[at(r0, c0)];
            };

            InteractionCandidate cand{fi, fj, 0.0};
            if (rows >= 2 && cols >= 2) {
                double best_interact = std::numeric_limits<double>::infinity();
                double best_additive = std::numeric_limits<double>::infinity();
                for (std::size_t ri = 1; ri < rows; ++ri) {
                    for (std::size_t cj = 1; cj < cols; ++cj) {
                        double w[2][2], s[2][2], q[2][2];
                        for (int a = 0; a < 2; ++a)
                            for (int bq = 0; bq < 2; ++bq) {
                                std::size_t r0 = a ? ri : 0, r1 = a ? rows : ri;
                                std::size_t c0 = bq ? cj : 0, c1 = bq ? cols : cj;
                                w[a][bq] = rect(cnt, r0, r1, c0, c1);
                                s[a][bq] = rect(sum, r0, r1, c0, c1);
                                q[a][bq] = rect(sumsq, r0, r1, c0, c1);
                            }
                        // quadrant-constant fit
                        double sse_interact = 0.0;
                        for (int a = 0; a < 2; ++a)
                            for (int bq = 0; bq < 2; ++bq)
                                sse_interact +=
                                    q[a][bq] -
                                    (w[a][bq] > 0.0 ? s[a][bq] * s[a][bq] / w[a][bq] : 0.0);
                        best_interact = std::min(best_interact, sse_interact);

                        // additive fit mu + alpha*[right] + beta*[top] with
                        // the same cuts: 3x3 normal equations, tiny ridge
                        // for degenerate cells.
                        double W = w[0][0] + w[0][1] + w[1][0] + w[1][1];
                        double W1 = w[1][0] + w[1][1];
                        double W2 = w[0][1] + w[1][1];
                        double S = s[0][0] + s[0][1] + s[1][0] + s[1][1];
                        double S1 = s[1][0] + s[1][1];
                        double S2 = s[0][1] + s[1][1];
                        double A[3][4] = {{W, W1, W2, S},
                                          {W1, W1, w[1][1], S1},
                                          {W2, w[1][1], W2, S2}};
                        for (int d = 0; d < 3; ++d) A[d][d] += 1e-9;
                        for (int col = 0; col < 3; ++col) {
                            int piv = col;
                            for (int row = col + 1; row < 3; ++row)
                                if (std::fabs(A[row][col]) > std::fabs(A[piv][col])) piv = row;
                            std::swap(A[col], A[piv]);
                            for (int row = 0; row < 3; ++row) {
                                if (row == col || A[col][col] == 0.0) continue;
                                double factor = A[row][col] / A[col][col];
                                for (int k = col; k < 4; ++k) A[row][k] -= factor * A[col][k];
                            }
                        }
                        double mu = A[0][3] / A[0][0];
                        double alpha = A[1][3] / A[1][1];
                        double beta = A[2][3] / A[2][2];
                        double sse_additive = 0.0;
                        for (int a = 0; a < 2; ++a)
                            for (int bq = 0; bq < 2; ++bq) {
                                double pred = mu + alpha * a + beta * bq;
                                sse_additive +=
                                    q[a][bq] - 2.0 * pred * s[a][bq] + w[a][bq] * pred * pred;
                            }
                        best_additive = std::min(best_additive, sse_additive);
                    }
                }
                cand.strength = std::max(0.0, best_additive - best_interact);
            }
            out.push_back(cand);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const InteractionCandidate& a, const InteractionCandidate& b) {
                         return a.strength > b.strength;
                     });
    return out;
}

std::vector<InteractionCandidate> rank_interactions(const AdditiveModel& mains_model,
                                                    const std::vector<FeatureVector>& x,
                                                    const std::vector<int>& y,
                                                    const EbmConfig& config) {
    if (kFeatureCount < 2 || config.interactions == 0) return {};
    std::vector<double> residuals(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        residuals[i] = static_cast<double>(y[i]) - predict_proba(mains_model, x[i]);
    Binner pair_binner = Binner::fit(x, config.pair_max_bins);
    std::vector<InteractionCandidate> ranked =
        rank_interactions_on_residuals(pair_binner, x, residuals);
    if (ranked.size() > config.interactions) ranked.resize(config.interactions);
    return ranked;
}

AdditiveModel train_ebm(const std::vector<FeatureVector>& x_train,
                        const std::vector<int>& y_train,
                        const std::vector<FeatureVector>& x_val,
                        const std::vector<int>& y_val,
                        const EbmConfig& config, EbmReport* report) {
    EbmReport local;
    EbmReport& rep = report ? *report : local;

    AdditiveModel mains = train_main_effects(x_train, y_train, x_val, y_val, config, &rep);
    const bool has_val = !x_val.empty();
    double mains_val = has_val ? mean_logloss(mains, x_val, y_val)
                               : std::numeric_limits<double>::quiet_NaN();
    rep.mains_val_logloss = mains_val;
    if (config.interactions == 0) return mains;

    // Residual screen on the training set. K caps the selection; a
    // sample-size-aware floor drops candidates indistinguishable from
    // noise (pure-noise strengths scale like 1/n of the residual SS).
    std::vector<double> residuals(x_train.size());
    double residual_ss = 0.0;
    for (std::size_t i = 0; i < x_train.size(); ++i) {
        residuals[i] = static_cast<double>(y_train[i]) - predict_proba(mains, x_train[i]);
        residual_ss += residuals[i] * residuals[i];
    }
    Binner pair_binner = Binner::fit(x_train, config.pair_max_bins);
    std::vector<InteractionCandidate> ranked =
        rank_interactions_on_residuals(pair_binner, x_train, residuals);
    const double strength_floor =
        20.0 / static_cast<double>(x_train.size()) * residual_ss;
    std::vector<InteractionCandidate> selected;
    for (const InteractionCandidate& cand : ranked) {
        if (selected.size() >= config.interactions) break;
        if (cand.strength >= strength_floor) selected.push_back(cand);
    }
    ranked = std::move(selected);
    rep.ranking = ranked;
    if (ranked.empty()) return mains;

    const std::size_t n = x_train.size();
    BinnedFeatures pair_bins = bin_rows(pair_binner, x_train);
    BinnedFeatures val_pair_bins = bin_rows(pair_binner, x_val);

    // Per-pair cell index per sample.
    const std::size_t P = ranked.size();
    std::vector<std::size_t> rows_of(P), cols_of(P);
    std::vector<std::vector<std::uint32_t>> cell(P), val_cell(P);
    for (std::size_t p = 0; p < P; ++p) {
        rows_of[p] = pair_binner.bin_count(ranked[p].feature_i);
        cols_of[p] = pair_binner.bin_count(ranked[p].feature_j);
        cell[p].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            cell[p][i] = static_cast<std::uint32_t>(
                pair_bins.by_feature[ranked[p].feature_i][i] * cols_of[p] +
                pair_bins.by_feature[ranked[p].feature_j][i]);
        val_cell[p].resize(x_val.size());
        for (std::size_t i = 0; i < x_val.size(); ++i)
            val_cell[p][i] = static_cast<std::uint32_t>(
                val_pair_bins.by_feature[ranked[p].feature_i][i] * cols_of[p] +
                val_pair_bins.by_feature[ranked[p].feature_j][i]);
    }

    std::vector<std::vector<std::size_t>> bags = make_bags(n, config);
    const std::size_t B = config.bag_count;

    // Frozen-mains base logits.
    std::vector<double> base_train(n), base_val(x_val.size());
    for (std::size_t i = 0; i < n; ++i) base_train[i] = predict_logit(mains, x_train[i]);
    for (std::size_t i = 0; i < x_val.size(); ++i) base_val[i] = predict_logit(mains, x_val[i]);

    // Per-bag grids with the same out-of-bag early stopping as stage 1.
    std::vector<std::vector<std::vector<double>>> grids(B), best_grids_bag(B);
    std::vector<std::vector<double>> logits(B);
    std::vector<std::vector<std::size_t>> oob(B);
    std::vector<std::vector<double>> oob_logits(B), bag_val_logits(B);
    std::vector<double> best_holdout(B, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> bag_best_round(B, 0);
    std::vector<char> active(B, 1);
    for (std::size_t b = 0; b < B; ++b) {
        grids[b].resize(P);
        for (std::size_t p = 0; p < P; ++p) grids[b][p].assign(rows_of[p] * cols_of[p], 0.0);
        best_grids_bag[b] = grids[b];
        logits[b].resize(bags[b].size());
        for (std::size_t k = 0; k < bags[b].size(); ++k) logits[b][k] = base_train[bags[b][k]];
        std::vector<char> in_bag(n, 0);
        for (std::size_t i : bags[b]) in_bag[i] = 1;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i]) oob[b].push_back(i);
        oob_logits[b].resize(oob[b].size());
        for (std::size_t k = 0; k < oob[b].size(); ++k)
            oob_logits[b][k] = base_train[oob[b][k]];
        bag_val_logits[b] = base_val;
    }

    auto bag_holdout_logloss = [&](std::size_t b) {
        if (!oob[b].empty()) {
            double total = 0.0;
            for (std::size_t k = 0; k < oob[b].size(); ++k) {
                double z = oob_logits[b][k];
                total += softplus(z) - static_cast<double>(y_train[oob[b][k]]) * z;
            }
            return total / static_cast<double>(oob[b].size());
        }
        if (has_val) return logloss_of_logits(bag_val_logits[b], y_val);
        return std::numeric_limits<double>::quiet_NaN();
    };
    for (std::size_t b = 0; b < B; ++b) {
        double baseline = bag_holdout_logloss(b);
        if (!std::isnan(baseline)) best_holdout[b] = baseline;
    }

    auto averaged_grids = [&](const std::vector<std::vector<std::vector<double>>>& source) {
        std::vector<std::vector<double>> avg(P);
        for (std::size_t p = 0; p < P; ++p) {
            avg[p].assign(rows_of[p] * cols_of[p], 0.0);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t c = 0; c < avg[p].size(); ++c) avg[p][c] += source[b][p][c];
            for (double& v : avg[p]) v /= static_cast<double>(B);
        }
        return avg;
    };
    auto eval_logloss = [&](const std::vector<std::vector<double>>& avg,
                            const std::vector<double>& base,
                            const std::vector<std::vector<std::uint32_t>>& cells,
                            const std::vector<int>& y) {
        std::vector<double> z = base;
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += avg[p][cells[p][i]];
        return logloss_of_logits(z, y);
    };

    std::size_t last_round = 0;
    std::vector<double> g, h, cnt, delta;
    for (std::size_t round = 1; round <= config.rounds; ++round) {
        bool any_active = false;
        for (std::size_t b = 0; b < B; ++b) {
            if (!active[b]) continue;
            any_active = true;
            for (std::size_t p = 0; p < P; ++p) {
                const std::size_t cells_n = rows_of[p] * cols_of[p];
                g.assign(cells_n, 0.0);
                h.assign(cells_n, 0.0);
                cnt.assign(cells_n, 0.0);
                const std::vector<std::size_t>& bag = bags[b];
                for (std::size_t k = 0; k < bag.size(); ++k) {
                    double prob = logistic(logits[b][k]);
                    std::uint32_t c = cell[p][bag[k]];
                    g[c] += static_cast<double>(y_train[bag[k]]) - prob;
                    h[c] += prob * (1.0 - prob);
                    cnt[c] += 1.0;
                }
                delta = fit_tree_quadrant(g, h, cnt, rows_of[p], cols_of[p]);
                for (double& v : delta) v *= config.learning_rate;
                for (std::size_t c = 0; c < cells_n; ++c) grids[b][p][c] += delta[c];
                for (std::size_t k = 0; k < bag.size(); ++k)
                    logits[b][k] += delta[cell[p][bag[k]]];
                for (std::size_t k = 0; k < oob[b].size(); ++k)
                    oob_logits[b][k] += delta[cell[p][oob[b][k]]];
                for (std::size_t k = 0; k < x_val.size(); ++k)
                    bag_val_logits[b][k] += delta[val_cell[p][k]];
            }

            double holdout = bag_holdout_logloss(b);
            if (std::isnan(holdout)) {
                best_grids_bag[b] = grids[b];
                bag_best_round[b] = round;
            } else if (holdout < best_holdout[b] - 1e-12) {
                best_holdout[b] = holdout;
                bag_best_round[b] = round;
                best_grids_bag[b] = grids[b];
            } else if (round - bag_best_round[b] >= config.patience) {
                active[b] = 0;
            }
        }
        if (!any_active) break;
        last_round = round;

        std::vector<std::vector<double>> avg = averaged_grids(grids);
        TrainLogEntry entry;
        entry.round = round;
        entry.train_logloss = eval_logloss(avg, base_train, cell, y_train);
        entry.val_logloss = has_val ? eval_logloss(avg, base_val, val_cell, y_val)
                                    : std::numeric_limits<double>::quiet_NaN();
        rep.pairs_log.push_back(entry);
    }
    rep.pairs_best_round = last_round;

    std::vector<std::vector<double>> final_grids = averaged_grids(best_grids_bag);
    AdditiveModel model = mains;
    model.pair_binner = pair_binner;
    std::vector<std::size_t> order(P);
    for (std::size_t p = 0; p < P; ++p) order[p] = p;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::pair(ranked[a].feature_i, ranked[a].feature_j) <
               std::pair(ranked[b].feature_i, ranked[b].feature_j);
    });
    for (std::size_t p : order) {
        PairShape shape;
        shape.feature_i = ranked[p].feature_i;
        shape.feature_j = ranked[p].feature_j;
        shape.bins_i = rows_of[p];
        shape.bins_j = cols_of[p];
        shape.contribution = final_grids[p];
        model.pairs.push_back(std::move(shape));
    }
    center_pairs(model, pair_bins, n);
    model.validate();

    if (has_val) {
        double final_val = mean_logloss(model, x_val, y_val);
        rep.final_val_logloss = final_val;
        if (final_val > mains_val) {
            rep.pairs_dropped_no_gain = true;
            return mains;
        }
    } else {
        rep.final_val_logloss = std::numeric_limits<double>::quiet_NaN();
    }
    return model;
}

} // namespace gamsum
