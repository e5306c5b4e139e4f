#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gamsum/error.hpp"
#include "gamsum/gam.hpp"
#include "gamsum/rng.hpp"

using namespace gamsum;

namespace {

std::vector<FeatureVector> random_rows(Rng& rng, std::size_t n) {
    std::vector<FeatureVector> rows(n);
    for (FeatureVector& row : rows)
        for (double& v : row) v = rng.uniform01();
    return rows;
}

Binner random_binner(Rng& rng) {
    std::vector<std::vector<double>> cuts(kFeatureCount);
    std::vector<double> mins(kFeatureCount, 0.0), maxs(kFeatureCount, 1.0);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::size_t k = rng.below(6);
        double x = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            x += 0.05 + rng.uniform01() * 0.2;
            if (x >= 1.0) break;
            cuts[f].push_back(x);
        }
    }
    Binner b;
    b.set_raw(std::move(cuts), std::move(mins), std::move(maxs));
    return b;
}

AdditiveModel random_model(Rng& rng) {
    AdditiveModel m;
    m.binner = random_binner(rng);
    m.pair_binner = random_binner(rng);
    m.intercept = rng.normal();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (rng.uniform01() < 0.25) continue; // some features without a shape
        MainShape shape;
        shape.feature = f;
        shape.contribution.resize(m.binner.bin_count(f));
        for (double& v : shape.contribution) v = rng.normal();
        m.mains.push_back(std::move(shape));
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        for (std::size_t j = i + 1; j < kFeatureCount; ++j) {
            if (rng.uniform01() < 0.75) continue;
            PairShape p;
            p.feature_i = i;
            p.feature_j = j;
            p.bins_i = m.pair_binner.bin_count(i);
            p.bins_j = m.pair_binner.bin_count(j);
            p.contribution.resize(p.bins_i * p.bins_j);
            for (double& v : p.contribution) v = rng.normal();
            m.pairs.push_back(std::move(p));
        }
    m.validate();
    return m;
}

// Test-side IRLS (Newton) for logistic regression with intercept; solves
// the normal equations directly — independent of the gradient-descent
// trainer it checks.
struct IrlsResult {
    std::vector<double> w;
    double bias;
};

IrlsResult irls(const std::vector<FeatureVector>& x, const std::vector<int>& y) {
    const std::size_t d = kFeatureCount + 1;
    std::vector<double> theta(d, 0.0);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> grad(d, 0.0);
        std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = theta[kFeatureCount];
            for (std::size_t f = 0; f < kFeatureCount; ++f) z += theta[f] * x[i][f];
            double p = 1.0 / (1.0 + std::exp(-z));
            double err = p - static_cast<double>(y[i]);
            double wgt = std::max(p * (1.0 - p), 1e-12);
            std::vector<double> xi(d, 1.0);
            for (std::size_t f = 0; f < kFeatureCount; ++f) xi[f] = x[i][f];
            for (std::size_t a = 0; a < d; ++a) {
                grad[a] += err * xi[a];
                for (std::size_t b = 0; b < d; ++b) hess[a][b] += wgt * xi[a] * xi[b];
            }
        }
        // solve hess * delta = grad
        std::vector<std::vector<double>> A = hess;
        std::vector<double> rhs = grad;
        for (std::size_t col = 0; col < d; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < d; ++r)
                if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
            std::swap(A[col], A[piv]);
            std::swap(rhs[col], rhs[piv]);
            for (std::size_t r = 0; r < d; ++r) {
                if (r == col) continue;
                double factor = A[r][col] / A[col][col];
                for (std::size_t c = col; c < d; ++c) A[r][c] -= factor * A[col][c];
                rhs[r] -= factor * rhs[col];
            }
        }
        double step_norm = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            double delta = rhs[a] / A[a][a];
            theta[a] -= delta;
            step_norm = std::max(step_norm, std::fabs(delta));
        }
        if (step_norm < 1e-12) break;
    }
    IrlsResult out;
    out.w.assign(theta.begin(), theta.begin() + kFeatureCount);
    out.bias = theta[kFeatureCount];
    return out;
}

} // namespace

TEST_CASE("fit_binner: quantile cuts on uniform data") {
    Rng rng(1);
    std::vector<FeatureVector> rows;
    for (int i = 0; i <= 1000; ++i) {
        FeatureVector row{};
        for (double& v : row) v = static_cast<double>(i) / 1000.0;
        rows.push_back(row);
    }
    Binner b = Binner::fit(rows, 4);
    REQUIRE(b.bin_count(0) == 4);
    CHECK(b.cut_points(0)[0] == doctest::Approx(0.25).epsilon(0.01));
    CHECK(b.cut_points(0)[1] == doctest::Approx(0.5).epsilon(0.01));
    CHECK(b.cut_points(0)[2] == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("fit_binner: constant and binary features") {
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 100; ++i) {
        FeatureVector row{};
        row[0] = 0.5;                  // constant
        row[1] = i % 2 ? 1.0 : 0.0;    // binary
        row[2] = static_cast<double>(i) / 99.0;
        rows.push_back(row);
    }
    Binner b = Binner::fit(rows, 256);
    CHECK(b.bin_count(0) == 1);
    CHECK(b.bin_count(1) == 2);
    CHECK(b.bin_index(1, 0.0) == 0);
    CHECK(b.bin_index(1, 1.0) == 1);
}

TEST_CASE("fit_binner: every value maps to exactly one bin, clamped at edges") {
    Rng rng(2);
    std::vector<FeatureVector> rows = random_rows(rng, 500);
    Binner b = Binner::fit(rows, 16);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        CHECK(b.bin_index(f, -10.0) == 0);
        CHECK(b.bin_index(f, 10.0) == b.bin_count(f) - 1);
        for (const FeatureVector& row : rows) {
            std::size_t bin = b.bin_index(f, row[f]);
            CHECK(bin < b.bin_count(f));
            auto [lo, hi] = b.bin_edges(f, bin);
            CHECK(lo <= hi);
        }
        // strictly increasing cuts
        const std::vector<double>& cuts = b.cut_points(f);
        for (std::size_t c = 1; c < cuts.size(); ++c) CHECK(cuts[c] > cuts[c - 1]);
    }
}

TEST_CASE("predict: intercept-only probabilities") {
    AdditiveModel m;
    std::vector<FeatureVector> one_row{FeatureVector{}};
    m.binner = Binner::fit(one_row, 2);
    FeatureVector x{};
    CHECK(predict_proba(m, x) == doctest::Approx(0.5));
    m.intercept = std::log(3.0);
    CHECK(predict_proba(m, x) == doctest::Approx(0.75));
}

TEST_CASE("decompose: sums bit-exactly to predict_logit (randomized)") {
    Rng rng(20240802);
    std::size_t checked = 0;
    for (int iter = 0; iter < 300; ++iter) {
        AdditiveModel m = random_model(rng);
        for (int k = 0; k < 10; ++k) {
            FeatureVector x;
            for (double& v : x) v = rng.uniform01() * 1.4 - 0.2; // includes out-of-range
            std::vector<TermContribution> terms = decompose(m, x);
            double sum = 0.0;
            for (const TermContribution& t : terms) sum += t.value;
            double logit = predict_logit(m, x);
            CHECK(sum == logit); // bit-exact: same operations, same order
            CHECK(std::isfinite(logit));
            ++checked;
        }
    }
    CHECK(checked == 3000);
}

TEST_CASE("decompose: fixed order and repeat determinism") {
    Rng rng(5);
    AdditiveModel m = random_model(rng);
    FeatureVector x;
    for (double& v : x) v = rng.uniform01();
    std::vector<TermContribution> a = decompose(m, x);
    std::vector<TermContribution> b = decompose(m, x);
    REQUIRE(a.size() == b.size());
    CHECK(a[0].kind == TermContribution::Kind::Intercept);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].value == b[i].value);
        CHECK(a[i].feature_i == b[i].feature_i);
    }
    // mains ordered by feature id, pairs lexicographic after mains
    for (std::size_t i = 2; i < a.size(); ++i) {
        if (a[i].kind == TermContribution::Kind::Main &&
            a[i - 1].kind == TermContribution::Kind::Main)
            CHECK(a[i].feature_i > a[i - 1].feature_i);
    }
}

TEST_CASE("rank invariance: increasing transform of logits keeps ordering") {
    Rng rng(6);
    AdditiveModel m = random_model(rng);
    std::vector<FeatureVector> rows = random_rows(rng, 40);
    std::vector<double> logits;
    for (const FeatureVector& r : rows) logits.push_back(predict_logit(m, r));
    std::vector<std::size_t> order_a(rows.size()), order_b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) order_a[i] = order_b[i] = i;
    std::stable_sort(order_a.begin(), order_a.end(),
                     [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
    std::stable_sort(order_b.begin(), order_b.end(), [&](std::size_t a, std::size_t b) {
        return 2.0 * logits[a] + 1.0 > 2.0 * logits[b] + 1.0; // strictly increasing map
    });
    CHECK(order_a == order_b);
}

TEST_CASE("importance_ratios: arithmetic cases") {
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 8; ++i) {
        FeatureVector row{};
        row[0] = i % 2 ? 1.0 : 0.0;
        row[1] = i % 2 ? 1.0 : 0.0;
        rows.push_back(row);
    }
    AdditiveModel m;
    m.binner = Binner::fit(rows, 8);
    MainShape s0;
    s0.feature = 0;
    s0.contribution = {-2.0, 2.0}; // std 2
    MainShape s1;
    s1.feature = 1;
    s1.contribution = {-1.0, 1.0}; // std 1
    m.mains = {s0, s1};
    std::vector<TermImportance> imp = importance_ratios(m, rows);
    REQUIRE(imp.size() == 2);
    CHECK(imp[0].feature_i == 0);
    CHECK(imp[0].ratio == doctest::Approx(2.0 / 3.0));
    CHECK(imp[1].ratio == doctest::Approx(1.0 / 3.0));

    // single nonzero term gets everything
    m.mains = {s0};
    std::vector<TermImportance> solo = importance_ratios(m, rows);
    CHECK(solo[0].ratio == doctest::Approx(1.0));

    // all-zero model is an explicit error
    s0.contribution = {0.0, 0.0};
    m.mains = {s0};
    CHECK_THROWS_AS(importance_ratios(m, rows), TrainingError);

    // mean-absolute-deviation variant stays normalized
    m.mains = {MainShape{0, {-2.0, 2.0}}, MainShape{1, {-1.0, 1.0}}};
    std::vector<TermImportance> mad =
        importance_ratios(m, rows, ImportanceStatistic::MeanAbsDev);
    CHECK(mad[0].ratio + mad[1].ratio == doctest::Approx(1.0));
}

TEST_CASE("export_shape_tables: one table per retained term, center lookups agree") {
    Rng rng(7);
    AdditiveModel m = random_model(rng);
    std::vector<ShapeTable> tables = export_shape_tables(m);
    CHECK(tables.size() == m.mains.size() + m.pairs.size());
    std::size_t main_idx = 0;
    for (const ShapeTable& t : tables) {
        if (t.kind != TermContribution::Kind::Main) continue;
        const MainShape& shape = m.mains[main_idx++];
        REQUIRE(t.rows.size() == shape.contribution.size());
        for (std::size_t b = 0; b < t.rows.size(); ++b) {
            double center = t.rows[b][2];
            FeatureVector x{};
            // fill other features with in-range values
            for (double& v : x) v = 0.0;
            x[shape.feature] = center;
            std::vector<TermContribution> terms = decompose(m, x);
            for (const TermContribution& tc : terms)
                if (tc.kind == TermContribution::Kind::Main && tc.feature_i == shape.feature)
                    CHECK(tc.value == doctest::Approx(t.rows[b][3]));
            CHECK(t.rows[b][3] == shape.contribution[b]);
        }
    }
}

TEST_CASE("train_logistic: linearly separable 1-D toy reaches accuracy 1") {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        FeatureVector row{};
        row[0] = static_cast<double>(i) / 59.0;
        x.push_back(row);
        y.push_back(row[0] > 0.5 ? 1 : 0);
    }
    LogisticConfig cfg;
    cfg.max_iterations = 50000;
    LogisticFit fit = train_logistic(x, y, cfg);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if ((predict_proba(fit.model, x[i]) > 0.5 ? 1 : 0) == y[i]) ++correct;
    CHECK(correct == x.size());
}

TEST_CASE("train_logistic: symmetric data gives near-zero weight") {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        FeatureVector row{};
        row[0] = static_cast<double>((i / 2) % 10) / 9.0;
        x.push_back(row);
        y.push_back(i % 2); // every feature value occurs with both labels
    }
    LogisticConfig cfg;
    cfg.gradient_tolerance = 1e-9;
    LogisticFit fit = train_logistic(x, y, cfg);
    CHECK(std::fabs(fit.coefficients[0]) < 1e-6);
}

TEST_CASE("train_logistic: coefficients match the IRLS oracle within 1e-4") {
    Rng rng(20240803);
    std::vector<FeatureVector> x = random_rows(rng, 400);
    std::vector<int> y;
    for (const FeatureVector& row : x) {
        double z = -0.4 + 1.8 * row[0] - 2.3 * row[1] + 0.9 * row[4];
        y.push_back(rng.uniform01() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
    }
    LogisticConfig cfg;
    cfg.max_iterations = 2000000;
    cfg.gradient_tolerance = 1e-10;
    LogisticFit fit = train_logistic(x, y, cfg);
    IrlsResult oracle = irls(x, y);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        CHECK(std::fabs(fit.coefficients[f] - oracle.w[f]) < 1e-4);
    CHECK(std::fabs(fit.bias - oracle.bias) < 1e-4);
    CHECK(fit.converged);
}

TEST_CASE("train_logistic: binned model tracks the linear predictor closely") {
    Rng rng(11);
    std::vector<FeatureVector> x = random_rows(rng, 500);
    std::vector<int> y;
    for (const FeatureVector& row : x)
        y.push_back(rng.uniform01() < 1.0 / (1.0 + std::exp(-(2.0 * row[0] - 1.0))) ? 1 : 0);
    LogisticFit fit = train_logistic(x, y);
    for (int k = 0; k < 50; ++k) {
        const FeatureVector& row = x[static_cast<std::size_t>(rng.below(x.size()))];
        double linear = fit.bias;
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            linear += fit.coefficients[f] * row[f];
        CHECK(std::fabs(predict_logit(fit.model, row) - linear) < 0.05);
    }
    // centering invariant: weighted shape means are ~0
    for (const MainShape& m : fit.model.mains) {
        double mean = 0.0;
        std::size_t count = 0;
        for (const FeatureVector& row : x) {
            mean += m.contribution[fit.model.binner.bin_index(m.feature, row[m.feature])];
            ++count;
        }
        CHECK(std::fabs(mean / static_cast<double>(count)) < 1e-9);
    }
    CHECK_THROWS_AS(train_logistic({FeatureVector{}}, {1}), TrainingError);
}
