#include <gtest/gtest.h>

#include "oracles.hpp"
#include "severoscan/harmony_search.hpp"
#include "severoscan/phantom.hpp"
#include "severoscan/threshold_filter.hpp"

using namespace severoscan;

namespace {

Histogram two_point() { return histogram(GrayImage(4, 1, std::vector<std::uint8_t>{0, 0, 255, 255})); }

Histogram phantom_body_histogram(std::uint64_t seed) {
    const auto t = phantom::generate(phantom::standard_spec(seed));
    return masked_histogram(t.image, body_mask(t.image));
}

} // namespace

TEST(Repair, Examples) {
    EXPECT_EQ(repair({200, 50}), ThresholdVector({50, 200}));
    EXPECT_EQ(repair({100, 100}), ThresholdVector({100, 101}));
    EXPECT_EQ(repair({254, 254}), ThresholdVector({253, 254}));
}

TEST(Repair, AlwaysValid) {
    Rng rng(4);
    for (int trial = 0; trial < 2000; ++trial) {
        const int k = static_cast<int>(rng.uniform_int(1, kMaxThresholds));
        std::vector<int> raw;
        for (int i = 0; i < k; ++i) raw.push_back(static_cast<int>(rng.uniform_int(-10, 270)));
        if (trial % 3 == 0) std::fill(raw.begin(), raw.end(), 254);
        EXPECT_NO_THROW({
            const auto t = repair(raw);
            EXPECT_EQ(t.size(), raw.size());
        });
    }
}

TEST(HarmonyParams, Validation) {
    HarmonyParams p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.hms, 20);
    EXPECT_DOUBLE_EQ(p.hmcr, 0.9);
    EXPECT_DOUBLE_EQ(p.par, 0.3);
    EXPECT_EQ(p.bw, 2);
    EXPECT_EQ(p.max_improvisations, 2000);
    EXPECT_EQ(p.k, 3);
    for (auto bad : {HarmonyParams{.hms = 1}, HarmonyParams{.hmcr = 1.5}, HarmonyParams{.par = -0.1},
                     HarmonyParams{.bw = 0}, HarmonyParams{.max_improvisations = 0}, HarmonyParams{.k = 9}}) {
        EXPECT_THROW(hso_maximize(two_point(), ObjectiveKind::otsu, bad), Error);
    }
    EXPECT_THROW(hso_maximize(Histogram{}, ObjectiveKind::otsu, p), Error);
}

TEST(Hso, FlatOptimumOnTwoPointHistogram) {
    HarmonyParams p;
    p.k = 1;
    p.max_improvisations = 500;
    p.seed = 42;
    const auto r = hso_maximize(two_point(), ObjectiveKind::otsu, p);
    EXPECT_EQ(r.best_value.value, 16256.25);
    EXPECT_EQ(r.evaluations, 520u);
}

TEST(Hso, ReachesOracleOnTrimodal) {
    const auto h = oracle::trimodal();
    HarmonyParams p{.hms = 20, .hmcr = 0.9, .par = 0.3, .bw = 2, .max_improvisations = 2000, .seed = 7, .k = 2};
    const auto r = hso_maximize(h, ObjectiveKind::otsu, p);
    const auto ex = exhaustive_best(h, ObjectiveKind::otsu, 2);
    EXPECT_GE(r.best_value.value, 0.999 * ex.best_value.value);
    EXPECT_LE(r.best_value.value, ex.best_value.value);
}

TEST(Hso, DeterministicForSeed) {
    const auto h = phantom_body_histogram(3);
    HarmonyParams p;
    p.record_trace = true;
    const auto a = hso_maximize(h, ObjectiveKind::otsu, p);
    const auto b = hso_maximize(h, ObjectiveKind::otsu, p);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.trace.size(), 2000u);
    p.seed = 43;
    const auto c = hso_maximize(h, ObjectiveKind::kapur, p);
    const auto d = hso_maximize(h, ObjectiveKind::kapur, p);
    EXPECT_EQ(c, d);
}

TEST(Hso, BestValueMatchesReevaluationAndTraceIsMonotone) {
    const auto h = phantom_body_histogram(4);
    HarmonyParams p;
    p.record_trace = true;
    for (auto kind : {ObjectiveKind::otsu, ObjectiveKind::kapur}) {
        const auto r = hso_maximize(h, kind, p);
        EXPECT_EQ(r.best_value.value, evaluate_objective(kind, h, r.best).value);
        EXPECT_EQ(r.trace.back(), r.best_value.value);
        for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
    }
}

TEST(Hso, MemoryStaysValidAndWorstNeverDrops) {
    const auto h = phantom_body_histogram(5);
    HarmonyParams p;
    p.max_improvisations = 800;
    double last_worst = -1.0;
    int calls = 0;
    hso_maximize(h, ObjectiveKind::otsu, p, [&](std::span<const Harmony> memory) {
        ++calls;
        double worst = memory[0].value;
        for (const auto& m : memory) {
            EXPECT_NO_THROW(ThresholdVector{m.cuts});
            EXPECT_EQ(m.cuts.size(), 3u);
            worst = std::min(worst, m.value);
        }
        EXPECT_GE(worst, last_worst);
        last_worst = worst;
    });
    EXPECT_EQ(calls, 801);
}

TEST(Hso, OracleDominates) {
    for (std::uint64_t seed : {1u, 2u}) {
        const auto h = phantom_body_histogram(seed);
        for (int k = 1; k <= 2; ++k) {
            HarmonyParams p;
            p.k = k;
            p.seed = seed;
            for (auto kind : {ObjectiveKind::otsu, ObjectiveKind::kapur}) {
                const auto ex = exhaustive_best(h, kind, k);
                const auto r = hso_maximize(h, kind, p);
                EXPECT_GE(ex.best_value.value, r.best_value.value);
            }
        }
    }
}

TEST(Hso, NearOptimalOnTwentySeededPhantoms) {
    HarmonyParams p;
    p.k = 2;
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto h = phantom_body_histogram(100 + s);
        p.seed = 1000 + s;
        const auto r = hso_maximize(h, ObjectiveKind::otsu, p);
        const auto ex = exhaustive_best(h, ObjectiveKind::otsu, 2);
        hits += r.best_value.value >= 0.999 * ex.best_value.value;
    }
    EXPECT_GE(hits, 19);
}

TEST(Exhaustive, Examples) {
    const auto a = exhaustive_best(two_point(), ObjectiveKind::otsu, 1);
    EXPECT_EQ(a.best_value.value, 16256.25);
    EXPECT_EQ(a.best, ThresholdVector({1}));
    EXPECT_EQ(a.evaluations, 254u);

    const auto c = exhaustive_best(histogram(GrayImage(10, 10, 7)), ObjectiveKind::otsu, 1);
    EXPECT_EQ(c.best_value.value, 0.0);

    std::array<std::uint64_t, 256> u;
    u.fill(1);
    const auto k = exhaustive_best(Histogram(u), ObjectiveKind::kapur, 1);
    EXPECT_EQ(k.best, ThresholdVector({128}));
    EXPECT_NEAR(k.best_value.value, 9.7041, 1e-4);

    EXPECT_THROW(exhaustive_best(two_point(), ObjectiveKind::otsu, 4), Error);
    EXPECT_EQ(exhaustive_best(two_point(), ObjectiveKind::otsu, 2).evaluations, 254u * 253u / 2u);
}

TEST(Canonicalize, SlidesAcrossEmptyBinsOnly) {
    const auto h = two_point();
    EXPECT_EQ(canonicalize(h, {200}), ThresholdVector({1}));
    EXPECT_EQ(canonicalize(h, {100, 200}), ThresholdVector({1, 2}));
    const auto t = oracle::trimodal();
    EXPECT_EQ(canonicalize(t, {100}), ThresholdVector({100}));
}
