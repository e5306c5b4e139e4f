#include "gamsum/gaminet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"

namespace gamsum {

namespace {

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

long double softplus_l(long double z) {
    return std::max<long double>(z, 0.0L) + std::log1p(std::exp(-std::fabs(z)));
}

// Forward pass over the flat parameter layout; Real is long double on the
// finite-difference path.
template <typename Real>
Real net_forward(const std::vector<std::size_t>& layers, const std::vector<Real>& params,
                 const Real* input) {
    std::vector<Real> act(input, input + layers[0]);
    std::vector<Real> next;
    std::size_t offset = 0;
    for (std::size_t l = 1; l < layers.size(); ++l) {
        const std::size_t in = layers[l - 1], out = layers[l];
        next.assign(out, Real(0));
        for (std::size_t k = 0; k < out; ++k) {
            Real z = params[offset + in * out + k]; // bias
            const Real* w = &params[offset + k * in];
            for (std::size_t j = 0; j < in; ++j) z += w[j] * act[j];
            next[k] = l + 1 < layers.size() ? std::tanh(z) : z;
        }
        act.swap(next);
        offset += in * out + out;
    }
    return act[0];
}

struct ForwardCache {
    // activations per layer (post-nonlinearity), including the input layer
    std::vector<std::vector<double>> act;
};

double net_forward_cached(const Subnetwork& net, const double* input, ForwardCache& cache) {
    cache.act.resize(net.layers.size());
    cache.act[0].assign(input, input + net.layers[0]);
    std::size_t offset = 0;
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        const std::size_t in = net.layers[l - 1], out = net.layers[l];
        cache.act[l].assign(out, 0.0);
        for (std::size_t k = 0; k < out; ++k) {
            double z = net.params[offset + in * out + k];
            const double* w = &net.params[offset + k * in];
            for (std::size_t j = 0; j < in; ++j) z += w[j] * cache.act[l - 1][j];
            cache.act[l][k] = l + 1 < net.layers.size() ? std::tanh(z) : z;
        }
        offset += in * out + out;
    }
    return cache.act.back()[0];
}

// Accumulates dLoss/dparams for one sample given dLoss/doutput.
void net_backward(const Subnetwork& net, const ForwardCache& cache, double d_out,
                  std::vector<double>& grad) {
    std::vector<double> d_act{d_out};
    std::vector<double> d_prev;
    std::size_t offset = net.params.size();
    for (std::size_t l = net.layers.size() - 1; l >= 1; --l) {
        const std::size_t in = net.layers[l - 1], out = net.layers[l];
        offset -= in * out + out;
        d_prev.assign(in, 0.0);
        for (std::size_t k = 0; k < out; ++k) {
            double dz = d_act[k];
            if (l + 1 < net.layers.size()) {
                double a = cache.act[l][k];
                dz *= 1.0 - a * a; // tanh'
            }
            grad[offset + in * out + k] += dz;
            for (std::size_t j = 0; j < in; ++j) {
                grad[offset + k * in + j] += dz * cache.act[l - 1][j];
                d_prev[j] += dz * net.params[offset + k * in + j];
            }
        }
        d_act.swap(d_prev);
    }
}

struct ClarityBins {
    // per-sample bin of each parent feature under the pair binner
    std::vector<std::uint16_t> bin_i, bin_j;
    std::size_t bins_i = 0, bins_j = 0;
};

ClarityBins make_clarity_bins(const Subnetwork& pair, const std::vector<FeatureVector>& rows,
                              const std::vector<std::size_t>& subset, const Binner& pair_binner) {
    ClarityBins cb;
    cb.bins_i = pair_binner.bin_count(pair.feature_i);
    cb.bins_j = pair_binner.bin_count(pair.feature_j);
    cb.bin_i.resize(subset.size());
    cb.bin_j.resize(subset.size());
    for (std::size_t k = 0; k < subset.size(); ++k) {
        cb.bin_i[k] = static_cast<std::uint16_t>(
            pair_binner.bin_index(pair.feature_i, rows[subset[k]][pair.feature_i]));
        cb.bin_j[k] = static_cast<std::uint16_t>(
            pair_binner.bin_index(pair.feature_j, rows[subset[k]][pair.feature_j]));
    }
    return cb;
}

// Clarity penalty and its gradient wrt each sample output. Outputs o_k,
// groups along both parent axes; penalty = average over the two parents of
// the mean squared bin-conditional mean over non-empty bins.
template <typename Real>
Real clarity_value(const std::vector<Real>& outputs, const ClarityBins& cb) {
    Real penalty(0);
    for (int axis = 0; axis < 2; ++axis) {
        const std::vector<std::uint16_t>& bins = axis == 0 ? cb.bin_i : cb.bin_j;
        const std::size_t bin_count = axis == 0 ? cb.bins_i : cb.bins_j;
        std::vector<Real> sum(bin_count, Real(0));
        std::vector<std::size_t> cnt(bin_count, 0);
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            sum[bins[k]] += outputs[k];
            ++cnt[bins[k]];
        }
        Real acc(0);
        std::size_t nonempty = 0;
        for (std::size_t b = 0; b < bin_count; ++b) {
            if (cnt[b] == 0) continue;
            ++nonempty;
            Real mean = sum[b] / Real(static_cast<double>(cnt[b]));
            acc += mean * mean;
        }
        if (nonempty > 0) penalty += acc / Real(static_cast<double>(nonempty));
    }
    return penalty / Real(2);
}

void clarity_output_grad(const std::vector<double>& outputs, const ClarityBins& cb,
                         double lambda, std::vector<double>& d_out) {
    for (int axis = 0; axis < 2; ++axis) {
        const std::vector<std::uint16_t>& bins = axis == 0 ? cb.bin_i : cb.bin_j;
        const std::size_t bin_count = axis == 0 ? cb.bins_i : cb.bins_j;
        std::vector<double> sum(bin_count, 0.0);
        std::vector<std::size_t> cnt(bin_count, 0);
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            sum[bins[k]] += outputs[k];
            ++cnt[bins[k]];
        }
        std::size_t nonempty = 0;
        for (std::size_t b = 0; b < bin_count; ++b)
            if (cnt[b] > 0) ++nonempty;
        if (nonempty == 0) continue;
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            double mean = sum[bins[k]] / static_cast<double>(cnt[bins[k]]);
            d_out[k] += lambda * mean /
                        (static_cast<double>(cnt[bins[k]]) * static_cast<double>(nonempty));
        }
    }
}

double population_variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

// Keeps the smallest prefix of variance-ranked effects whose cumulative
// share reaches tau. Returns indices into `variances`, ranking order.
std::vector<std::size_t> keep_by_cumulative_ratio(const std::vector<double>& variances,
                                                  double tau) {
    std::vector<std::size_t> order(variances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return variances[a] > variances[b]; });
    double total = std::accumulate(variances.begin(), variances.end(), 0.0);
    std::vector<std::size_t> kept;
    if (total <= 0.0) return kept;
    double cum = 0.0;
    for (std::size_t idx : order) {
        kept.push_back(idx);
        cum += variances[idx];
        if (cum >= tau * total - 1e-12) break;
    }
    return kept;
}

struct StageNets {
    std::vector<Subnetwork*> mains;
    std::vector<Subnetwork*> pairs;
    bool train_bias = false;
};

struct StageData {
    const std::vector<FeatureVector>& x;
    const std::vector<int>& y;
    const std::vector<FeatureVector>& x_val;
    const std::vector<int>& y_val;
    const std::vector<double>& offsets;     // frozen per-sample logit offset
    const std::vector<double>& val_offsets;
    const Binner& pair_binner;
};

double stage_objective(const StageNets& nets, double bias, const StageData& d, bool validation,
                       double lambda) {
    const std::vector<FeatureVector>& x = validation ? d.x_val : d.x;
    const std::vector<int>& y = validation ? d.y_val : d.y;
    const std::vector<double>& offsets = validation ? d.val_offsets : d.offsets;
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();

    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = bias + (offsets.empty() ? 0.0 : offsets[i]);
        for (const Subnetwork* m : nets.mains) z += m->output(x[i][m->feature_i]);
        for (const Subnetwork* p : nets.pairs)
            z += p->output(x[i][p->feature_i], x[i][p->feature_j]);
        loss += softplus(z) - static_cast<double>(y[i]) * z;
    }
    loss /= static_cast<double>(x.size());

    if (lambda > 0.0 && !validation) {
        std::vector<std::size_t> all(x.size());
        std::iota(all.begin(), all.end(), 0);
        for (const Subnetwork* p : nets.pairs) {
            ClarityBins cb = make_clarity_bins(*p, x, all, d.pair_binner);
            std::vector<double> outputs(x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                outputs[i] = p->output(x[i][p->feature_i], x[i][p->feature_j]);
            loss += lambda * clarity_value(outputs, cb);
        }
    }
    return loss;
}

void run_stage(int stage_index, StageNets& nets, double& bias, const StageData& d,
               std::size_t epochs, const GaminetConfig& cfg,
               std::vector<TrainLogEntry>* log) {
    const std::size_t n = d.x.size();
    const double lambda = cfg.clarity_weight;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<std::vector<double>> main_grads(nets.mains.size());
    std::vector<std::vector<double>> pair_grads(nets.pairs.size());

    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, "gaminet-shuffle",
                                    static_cast<std::uint64_t>(stage_index) * 1000000 + epoch));
        std::iota(perm.begin(), perm.end(), 0);
        shuffle_rng.shuffle(perm);

        for (std::size_t batch_start = 0; batch_start < n; batch_start += cfg.batch_size) {
            const std::size_t batch_end = std::min(n, batch_start + cfg.batch_size);
            const std::size_t bn = batch_end - batch_start;
            std::vector<std::size_t> batch(perm.begin() + batch_start, perm.begin() + batch_end);

            // Forward all trainable nets; total logit per sample.
            std::vector<double> total(bn, 0.0);
            for (std::size_t k = 0; k < bn; ++k)
                total[k] = bias + (d.offsets.empty() ? 0.0 : d.offsets[batch[k]]);

            std::vector<std::vector<ForwardCache>> main_caches(nets.mains.size());
            std::vector<std::vector<double>> main_out(nets.mains.size());
            for (std::size_t m = 0; m < nets.mains.size(); ++m) {
                main_caches[m].resize(bn);
                main_out[m].resize(bn);
                const Subnetwork& net = *nets.mains[m];
                for (std::size_t k = 0; k < bn; ++k) {
                    double input = d.x[batch[k]][net.feature_i];
                    main_out[m][k] = net_forward_cached(net, &input, main_caches[m][k]);
                    total[k] += main_out[m][k];
                }
            }
            std::vector<std::vector<ForwardCache>> pair_caches(nets.pairs.size());
            std::vector<std::vector<double>> pair_out(nets.pairs.size());
            std::vector<ClarityBins> pair_cb(nets.pairs.size());
            for (std::size_t p = 0; p < nets.pairs.size(); ++p) {
                pair_caches[p].resize(bn);
                pair_out[p].resize(bn);
                const Subnetwork& net = *nets.pairs[p];
                pair_cb[p] = make_clarity_bins(net, d.x, batch, d.pair_binner);
                for (std::size_t k = 0; k < bn; ++k) {
                    double input[2] = {d.x[batch[k]][net.feature_i], d.x[batch[k]][net.feature_j]};
                    pair_out[p][k] = net_forward_cached(net, input, pair_caches[p][k]);
                    total[k] += pair_out[p][k];
                }
            }

            // dLoss/dlogit of the mean logloss.
            std::vector<double> d_logit(bn);
            for (std::size_t k = 0; k < bn; ++k) {
                double prob = 1.0 / (1.0 + std::exp(-total[k]));
                d_logit[k] = (prob - static_cast<double>(d.y[batch[k]])) / static_cast<double>(bn);
            }

            double bias_grad = 0.0;
            if (nets.train_bias)
                for (double v : d_logit) bias_grad += v;

            for (std::size_t m = 0; m < nets.mains.size(); ++m) {
                main_grads[m].assign(nets.mains[m]->param_count(), 0.0);
                for (std::size_t k = 0; k < bn; ++k)
                    net_backward(*nets.mains[m], main_caches[m][k], d_logit[k], main_grads[m]);
            }
            for (std::size_t p = 0; p < nets.pairs.size(); ++p) {
                pair_grads[p].assign(nets.pairs[p]->param_count(), 0.0);
                std::vector<double> d_out = d_logit;
                if (lambda > 0.0) clarity_output_grad(pair_out[p], pair_cb[p], lambda, d_out);
                for (std::size_t k = 0; k < bn; ++k)
                    net_backward(*nets.pairs[p], pair_caches[p][k], d_out[k], pair_grads[p]);
            }

            // Global gradient clipping across everything trainable.
            double norm2 = bias_grad * bias_grad;
            for (const std::vector<double>& g : main_grads)
                for (double v : g) norm2 += v * v;
            for (const std::vector<double>& g : pair_grads)
                for (double v : g) norm2 += v * v;
            double scale = 1.0;
            double norm = std::sqrt(norm2);
            if (norm > cfg.clip_norm && norm > 0.0) scale = cfg.clip_norm / norm;

            if (nets.train_bias) bias -= cfg.step_size * scale * bias_grad;
            for (std::size_t m = 0; m < nets.mains.size(); ++m)
                for (std::size_t k = 0; k < main_grads[m].size(); ++k)
                    nets.mains[m]->params[k] -= cfg.step_size * scale * main_grads[m][k];
            for (std::size_t p = 0; p < nets.pairs.size(); ++p)
                for (std::size_t k = 0; k < pair_grads[p].size(); ++k)
                    nets.pairs[p]->params[k] -= cfg.step_size * scale * pair_grads[p][k];
        }

        double train_loss = stage_objective(nets, bias, d, false, lambda);
        if (!std::isfinite(train_loss))
            throw TrainingError("gaminet: loss diverged to non-finite at stage " +
                                std::to_string(stage_index) + ", epoch " + std::to_string(epoch) +
                                "; reduce the step size");
        if (log) {
            TrainLogEntry e;
            e.round = epoch;
            e.train_logloss = train_loss;
            e.val_logloss = stage_objective(nets, bias, d, true, 0.0);
            log->push_back(e);
        }
    }
}

} // namespace

void GaminetConfig::validate() const {
    for (std::size_t e : stage_epochs)
        if (e < 1) throw ValidationError("gaminet config: stage epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("gaminet config: batch size must be >= 1");
    if (step_size <= 0.0) throw ValidationError("gaminet config: step size must be positive");
    if (prune_tau <= 0.0 || prune_tau > 1.0)
        throw ValidationError("gaminet config: tau must be in (0, 1]");
    if (clarity_weight < 0.0)
        throw ValidationError("gaminet config: clarity weight must be >= 0");
    if (hidden.empty()) throw ValidationError("gaminet config: at least one hidden layer");
}

Subnetwork Subnetwork::make(Kind kind, std::size_t fi, std::size_t fj,
                            const std::vector<std::size_t>& hidden, std::uint64_t seed) {
    Subnetwork net;
    net.kind = kind;
    net.feature_i = fi;
    net.feature_j = fj;
    net.layers.push_back(kind == Kind::Main ? 1 : 2);
    for (std::size_t h : hidden) net.layers.push_back(h);
    net.layers.push_back(1);

    std::size_t total = 0;
    for (std::size_t l = 1; l < net.layers.size(); ++l)
        total += net.layers[l - 1] * net.layers[l] + net.layers[l];
    net.params.assign(total, 0.0);

    // Glorot-uniform weights, zero biases.
    Rng rng(seed);
    std::size_t offset = 0;
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        const std::size_t in = net.layers[l - 1], out = net.layers[l];
        double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (std::size_t k = 0; k < in * out; ++k)
            net.params[offset + k] = (2.0 * rng.uniform01() - 1.0) * bound;
        offset += in * out + out;
    }
    return net;
}

double Subnetwork::output(double a, double b) const {
    double input[2] = {a, b};
    return net_forward(layers, params, input);
}

double GaminetModel::predict_native_logit(const FeatureVector& x) const {
    double z = bias;
    for (const Subnetwork& m : mains) z += m.output(x[m.feature_i]);
    for (const Subnetwork& p : pairs) z += p.output(x[p.feature_i], x[p.feature_j]);
    return z;
}

double clarity_penalty(const Subnetwork& pair, const std::vector<FeatureVector>& batch,
                       const Binner& pair_binner) {
    if (batch.empty()) return 0.0;
    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    ClarityBins cb = make_clarity_bins(pair, batch, all, pair_binner);
    std::vector<double> outputs(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        outputs[i] = pair.output(batch[i][pair.feature_i], batch[i][pair.feature_j]);
    return clarity_value(outputs, cb);
}

double gradient_check(const Subnetwork& net, const std::vector<FeatureVector>& batch,
                      const std::vector<int>& y, double clarity_weight,
                      const Binner& pair_binner) {
    const std::size_t bn = batch.size();
    std::vector<std::size_t> all(bn);
    std::iota(all.begin(), all.end(), 0);
    ClarityBins cb;
    const bool is_pair = net.kind == Subnetwork::Kind::Pair;
    if (is_pair) cb = make_clarity_bins(net, batch, all, pair_binner);

    // Analytic gradient via the training backward pass.
    std::vector<double> grad(net.param_count(), 0.0);
    std::vector<ForwardCache> caches(bn);
    std::vector<double> outputs(bn);
    for (std::size_t k = 0; k < bn; ++k) {
        double input[2] = {batch[k][net.feature_i],
                           is_pair ? batch[k][net.feature_j] : 0.0};
        outputs[k] = net_forward_cached(net, input, caches[k]);
    }
    std::vector<double> d_out(bn);
    for (std::size_t k = 0; k < bn; ++k) {
        double prob = 1.0 / (1.0 + std::exp(-outputs[k]));
        d_out[k] = (prob - static_cast<double>(y[k])) / static_cast<double>(bn);
    }
    if (is_pair && clarity_weight > 0.0)
        clarity_output_grad(outputs, cb, clarity_weight, d_out);
    for (std::size_t k = 0; k < bn; ++k) net_backward(net, caches[k], d_out[k], grad);

    // Numeric gradient on a widened-precision forward path.
    std::vector<long double> params_l(net.params.begin(), net.params.end());
    auto objective = [&](const std::vector<long double>& p) {
        std::vector<long double> outs(bn);
        long double loss = 0.0L;
        for (std::size_t k = 0; k < bn; ++k) {
            long double input[2] = {static_cast<long double>(batch[k][net.feature_i]),
                                    is_pair ? static_cast<long double>(batch[k][net.feature_j])
                                            : 0.0L};
            outs[k] = net_forward(net.layers, p, input);
            loss += softplus_l(outs[k]) - static_cast<long double>(y[k]) * outs[k];
        }
        loss /= static_cast<long double>(bn);
        if (is_pair && clarity_weight > 0.0)
            loss += static_cast<long double>(clarity_weight) * clarity_value(outs, cb);
        return loss;
    };

    const long double h = 1e-5L;
    double max_rel = 0.0;
    for (std::size_t k = 0; k < net.param_count(); ++k) {
        long double saved = params_l[k];
        params_l[k] = saved + h;
        long double up = objective(params_l);
        params_l[k] = saved - h;
        long double down = objective(params_l);
        params_l[k] = saved;
        double numeric = static_cast<double>((up - down) / (2.0L * h));
        double denom = std::max({std::fabs(grad[k]), std::fabs(numeric), 1e-4});
        max_rel = std::max(max_rel, std::fabs(grad[k] - numeric) / denom);
    }
    return max_rel;
}

GaminetModel train_gaminet(const std::vector<FeatureVector>& x_train,
                           const std::vector<int>& y_train,
                           const std::vector<FeatureVector>& x_val,
                           const std::vector<int>& y_val,
                           const GaminetConfig& config, GaminetReport* report) {
    config.validate();
    if (x_train.empty() || x_train.size() != y_train.size())
        throw ValidationError("gaminet: empty or mismatched training data");
    std::size_t pos = 0;
    for (int v : y_train) pos += static_cast<std::size_t>(v);
    if (pos == 0 || pos == y_train.size())
        throw TrainingError("gaminet: training data has a single class");

    GaminetReport local;
    GaminetReport& rep = report ? *report : local;
    const std::size_t n = x_train.size();

    GaminetModel model;
    model.binner = Binner::fit(x_train, config.max_bins);
    model.pair_binner = Binner::fit(x_train, config.pair_max_bins);
    model.bias = std::log(static_cast<double>(pos) / static_cast<double>(n - pos));

    const std::vector<double> no_offsets;

    // Stage 1: all main subnetworks trained jointly.
    std::vector<Subnetwork> mains;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        mains.push_back(Subnetwork::make(Subnetwork::Kind::Main, f, 0, config.hidden,
                                         derive_seed(config.seed, "gaminet-init-main", f)));
    {
        StageNets nets;
        for (Subnetwork& m : mains) nets.mains.push_back(&m);
        nets.train_bias = true;
        StageData data{x_train, y_train, x_val, y_val, no_offsets, no_offsets,
                       model.pair_binner};
        run_stage(1, nets, model.bias, data, config.stage_epochs[0], config,
                  &rep.stage_log[0]);
    }

    // Prune mains by contribution variance at tau.
    std::vector<double> main_var(kFeatureCount, 0.0);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::vector<double> outputs(n);
        for (std::size_t i = 0; i < n; ++i) outputs[i] = mains[f].output(x_train[i][f]);
        main_var[f] = population_variance(outputs);
    }
    std::vector<std::size_t> kept_mains = keep_by_cumulative_ratio(main_var, config.prune_tau);
    std::sort(kept_mains.begin(), kept_mains.end());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (std::find(kept_mains.begin(), kept_mains.end(), f) != kept_mains.end()) {
            rep.retained_mains.push_back(f);
            model.mains.push_back(std::move(mains[f]));
        } else {
            rep.pruned_mains.push_back(f);
        }
    }

    // Stage 2: screen pairs on stage-1 residuals, heredity filter, train
    // pair subnetworks against the frozen mains.
    std::vector<double> offsets(n), val_offsets(x_val.size());
    auto frozen_offset = [&](const FeatureVector& row) {
        double z = 0.0;
        for (const Subnetwork& m : model.mains) z += m.output(row[m.feature_i]);
        return z;
    };
    for (std::size_t i = 0; i < n; ++i) offsets[i] = frozen_offset(x_train[i]);
    for (std::size_t i = 0; i < x_val.size(); ++i) val_offsets[i] = frozen_offset(x_val[i]);

    std::vector<Subnetwork> pair_nets;
    if (config.interactions > 0 && !model.mains.empty()) {
        std::vector<double> residuals(n);
        double residual_ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = model.bias + offsets[i];
            residuals[i] = static_cast<double>(y_train[i]) - 1.0 / (1.0 + std::exp(-z));
            residual_ss += residuals[i] * residuals[i];
        }
        std::vector<InteractionCandidate> ranked =
            rank_interactions_on_residuals(model.pair_binner, x_train, residuals);
        const double strength_floor = 20.0 / static_cast<double>(n) * residual_ss;
        for (const InteractionCandidate& cand : ranked) {
            if (rep.trained_pairs.size() >= config.interactions) break;
            if (cand.strength < strength_floor) continue;
            bool heredity =
                std::find(rep.retained_mains.begin(), rep.retained_mains.end(),
                          cand.feature_i) != rep.retained_mains.end() ||
                std::find(rep.retained_mains.begin(), rep.retained_mains.end(),
                          cand.feature_j) != rep.retained_mains.end();
            if (!heredity) continue;
            rep.trained_pairs.push_back(cand);
            pair_nets.push_back(Subnetwork::make(
                Subnetwork::Kind::Pair, cand.feature_i, cand.feature_j, config.hidden,
                derive_seed(config.seed, "gaminet-init-pair",
                            cand.feature_i * kFeatureCount + cand.feature_j)));
        }
    }
    if (!pair_nets.empty()) {
        StageNets nets;
        for (Subnetwork& p : pair_nets) nets.pairs.push_back(&p);
        nets.train_bias = false;
        StageData data{x_train, y_train, x_val, y_val, offsets, val_offsets, model.pair_binner};
        run_stage(2, nets, model.bias, data, config.stage_epochs[1], config,
                  &rep.stage_log[1]);

        std::vector<double> pair_var(pair_nets.size(), 0.0);
        for (std::size_t p = 0; p < pair_nets.size(); ++p) {
            std::vector<double> outputs(n);
            for (std::size_t i = 0; i < n; ++i)
                outputs[i] = pair_nets[p].output(x_train[i][pair_nets[p].feature_i],
                                                 x_train[i][pair_nets[p].feature_j]);
            pair_var[p] = population_variance(outputs);
        }
        std::vector<std::size_t> kept_pairs =
            keep_by_cumulative_ratio(pair_var, config.prune_tau);
        std::sort(kept_pairs.begin(), kept_pairs.end());
        for (std::size_t p = 0; p < pair_nets.size(); ++p) {
            auto key = std::pair(pair_nets[p].feature_i, pair_nets[p].feature_j);
            if (std::find(kept_pairs.begin(), kept_pairs.end(), p) != kept_pairs.end()) {
                rep.retained_pairs.push_back(key);
                model.pairs.push_back(std::move(pair_nets[p]));
            } else {
                rep.pruned_pairs.push_back(key);
            }
        }
    }

    // Stage 3: fine-tune everything retained.
    {
        StageNets nets;
        for (Subnetwork& m : model.mains) nets.mains.push_back(&m);
        for (Subnetwork& p : model.pairs) nets.pairs.push_back(&p);
        nets.train_bias = true;
        StageData data{x_train, y_train, x_val, y_val, no_offsets, no_offsets,
                       model.pair_binner};
        run_stage(3, nets, model.bias, data, config.stage_epochs[2], config,
                  &rep.stage_log[2]);
    }

    // Export the networks onto the quantile grids: representative value per
    // bin is the in-bin training mean (bin center when empty); grids are
    // centered with means folded into the intercept.
    AdditiveModel& out = model.exported;
    out.binner = model.binner;
    out.pair_binner = model.pair_binner;
    out.intercept = model.bias;

    std::vector<std::vector<double>> rep_main(kFeatureCount), rep_pair(kFeatureCount);
    std::vector<std::vector<std::size_t>> count_main(kFeatureCount), count_pair(kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        auto fill = [&](const Binner& binner, std::vector<double>& reps,
                        std::vector<std::size_t>& counts) {
            const std::size_t bins = binner.bin_count(f);
            std::vector<double> sum(bins, 0.0);
            counts.assign(bins, 0);
            for (const FeatureVector& row : x_train) {
                std::size_t b = binner.bin_index(f, row[f]);
                sum[b] += row[f];
                ++counts[b];
            }
            reps.resize(bins);
            for (std::size_t b = 0; b < bins; ++b)
                reps[b] = counts[b] > 0 ? sum[b] / static_cast<double>(counts[b])
                                        : binner.bin_center(f, b);
        };
        fill(model.binner, rep_main[f], count_main[f]);
        fill(model.pair_binner, rep_pair[f], count_pair[f]);
    }

    for (const Subnetwork& m : model.mains) {
        MainShape shape;
        shape.feature = m.feature_i;
        const std::size_t bins = model.binner.bin_count(m.feature_i);
        shape.contribution.resize(bins);
        for (std::size_t b = 0; b < bins; ++b)
            shape.contribution[b] = m.output(rep_main[m.feature_i][b]);
        double mean = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
            mean += shape.contribution[b] * static_cast<double>(count_main[m.feature_i][b]);
        mean /= static_cast<double>(n);
        for (double& v : shape.contribution) v -= mean;
        out.intercept += mean;
        out.mains.push_back(std::move(shape));
    }
    std::sort(out.mains.begin(), out.mains.end(),
              [](const MainShape& a, const MainShape& b) { return a.feature < b.feature; });

    for (const Subnetwork& p : model.pairs) {
        PairShape shape;
        shape.feature_i = p.feature_i;
        shape.feature_j = p.feature_j;
        shape.bins_i = model.pair_binner.bin_count(p.feature_i);
        shape.bins_j = model.pair_binner.bin_count(p.feature_j);
        shape.contribution.assign(shape.bins_i * shape.bins_j, 0.0);
        for (std::size_t bi = 0; bi < shape.bins_i; ++bi)
            for (std::size_t bj = 0; bj < shape.bins_j; ++bj)
                shape.at(bi, bj) =
                    p.output(rep_pair[p.feature_i][bi], rep_pair[p.feature_j][bj]);

        std::vector<std::size_t> joint(shape.bins_i * shape.bins_j, 0);
        for (const FeatureVector& row : x_train)
            ++joint[model.pair_binner.bin_index(p.feature_i, row[p.feature_i]) * shape.bins_j +
                    model.pair_binner.bin_index(p.feature_j, row[p.feature_j])];
        double mean = 0.0;
        for (std::size_t c = 0; c < shape.contribution.size(); ++c)
            mean += shape.contribution[c] * static_cast<double>(joint[c]);
        mean /= static_cast<double>(n);
        for (double& v : shape.contribution) v -= mean;
        out.intercept += mean;
        out.pairs.push_back(std::move(shape));
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const PairShape& a, const PairShape& b) {
        return std::pair(a.feature_i, a.feature_j) < std::pair(b.feature_i, b.feature_j);
    });
    out.validate();
    return model;
}

} // namespace gamsum
