#include <gtest/gtest.h>

#include <limits>

#include "severoscan/harmony_search.hpp"
#include "severoscan/morphology.hpp"
#include "severoscan/phantom.hpp"
#include "severoscan/rng.hpp"
#include "severoscan/segmentation.hpp"
#include "severoscan/threshold_filter.hpp"
#include "severoscan/watershed.hpp"

using namespace severoscan;

namespace {

BinaryMask random_mask(Rng& rng, int w, int h, double p) {
    BinaryMask m(w, h);
    for (auto& v : m.pixels()) v = rng.bernoulli(p);
    return m;
}

BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
    return m;
}

struct Prepared {
    phantom::PhantomTruth truth;
    GrayImage lung_img;
    BinaryMask lung;
    ThresholdVector t;
};

Prepared prepare(const phantom::PhantomSpec& spec, int k = 3) {
    Prepared p{phantom::generate(spec), {}, {}, {}};
    p.lung_img = split_artifact(p.truth.image).lung;
    p.lung = lung_mask(p.lung_img);
    HarmonyParams params;
    params.k = k;
    p.t = hso_maximize(masked_histogram(p.lung_img, p.lung), ObjectiveKind::otsu, params).best;
    return p;
}

phantom::PhantomSpec one_blob(std::uint64_t seed, double radius = 35.0) {
    auto spec = phantom::standard_spec(seed);
    spec.infection_blobs.push_back({spec.lungs[0].cx, spec.lungs[0].cy + 20.0, radius});
    return spec;
}

} // namespace

TEST(Sobel, ConstantImageHasZeroGradient) {
    const auto g = sobel_edges(GrayImage(12, 9, 90));
    for (double v : g.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(Sobel, VerticalStep) {
    GrayImage img(16, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 8; x < 16; ++x) img(x, y) = 255;
    const auto g = sobel_edges(img);
    for (int y = 0; y < 8; ++y) {
        EXPECT_DOUBLE_EQ(g(7, y), 4 * 255.0);
        EXPECT_DOUBLE_EQ(g(8, y), 4 * 255.0);
        EXPECT_EQ(g(2, y), 0.0);
        EXPECT_EQ(g(13, y), 0.0);
        for (int x = 0; x < 16; ++x) EXPECT_LE(g(x, y), g(7, y));
    }
}

TEST(Sobel, PhantomBoundariesDominateInteriors) {
    const auto t = phantom::generate(one_blob(3));
    const auto g = sobel_edges(t.image);
    // Boundary: a pixel whose 4-neighbourhood crosses any truth mask; flat:
    // pixels at least 3 px from every boundary.
    const int w = t.image.width(), h = t.image.height();
    auto region = [&](int x, int y) {
        return t.body_mask(x, y) + 2 * t.lung_mask(x, y) + 4 * t.infection_mask(x, y);
    };
    BinaryMask boundary(w, h);
    for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x) {
            const int r = region(x, y);
            boundary(x, y) = region(x + 1, y) != r || region(x - 1, y) != r || region(x, y + 1) != r ||
                             region(x, y - 1) != r;
        }
    const auto near = dilate(boundary, 3);
    double sb = 0, sf = 0;
    std::size_t nb = 0, nf = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (boundary[i]) {
            sb += g[i];
            ++nb;
        } else if (!near[i]) {
            sf += g[i];
            ++nf;
        }
    }
    ASSERT_GT(nb, 0u);
    EXPECT_GT(sb / nb, 10.0 * (sf / nf));
}

TEST(Watershed, UniformGradientTwoMarkersCoversPlane) {
    RealImage g(20, 10, 0.0);
    LabelImage markers(20, 10);
    markers(2, 5) = 1;
    markers(17, 5) = 2;
    const auto l = watershed(g, markers);
    std::size_t ones = 0, twos = 0;
    for (auto v : l.pixels()) {
        ones += v == 1;
        twos += v == 2;
    }
    EXPECT_EQ(ones + twos, l.size());
    EXPECT_GT(ones, 0u);
    EXPECT_GT(twos, 0u);
    EXPECT_EQ(l(0, 0), 1);
    EXPECT_EQ(l(19, 9), 2);
}

TEST(Watershed, InfiniteWallSeparatesBasins) {
    const int w = 21, h = 11;
    RealImage g(w, h, 1.0);
    for (int y = 0; y < h; ++y) g(10, y) = std::numeric_limits<double>::infinity();
    LabelImage markers(w, h);
    markers(3, 3) = 1;
    markers(15, 8) = 2;
    const auto l = watershed(g, markers);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < 10; ++x) EXPECT_EQ(l(x, y), 1);
        for (int x = 11; x < w; ++x) EXPECT_EQ(l(x, y), 2);
        EXPECT_TRUE(l(10, y) == 1 || l(10, y) == 2);
    }
}

TEST(Watershed, CompletenessAndDeterminism) {
    Rng rng(8);
    RealImage g(40, 30);
    for (auto& v : g.pixels()) v = rng.uniform() * 100.0;
    LabelImage markers(40, 30);
    markers(5, 5) = 3;
    markers(30, 20) = 7;
    markers(20, 2) = 3;
    const auto a = watershed(g, markers);
    EXPECT_EQ(a, watershed(g, markers));
    for (auto v : a.pixels()) EXPECT_TRUE(v == 3 || v == 7);
    EXPECT_THROW(watershed(g, LabelImage(40, 30)), Error);
    EXPECT_THROW(watershed(g, LabelImage(3, 3, 1)), Error);
}

TEST(Watershed, PhantomInfectionBasin) {
    const auto p = prepare(one_blob(11));
    const auto stages = extract_infection_stages(p.lung_img, p.lung, p.t);
    BinaryMask basin(p.lung.width(), p.lung.height());
    for (std::size_t i = 0; i < basin.size(); ++i) basin[i] = stages.basins[i] == kInfectionBasin && p.lung[i];
    EXPECT_GE(dice(basin, p.truth.infection_mask), 0.85);
}

TEST(Morphology, AllTrueStaysTrueAwayFromBorder) {
    const auto m = morph_open_close(BinaryMask(30, 30, 1), 2);
    for (int y = 2; y < 28; ++y)
        for (int x = 2; x < 28; ++x) EXPECT_TRUE(m(x, y));
}

TEST(Morphology, IsolatedPixelRemoved) {
    BinaryMask m(15, 15);
    m(7, 7) = 1;
    EXPECT_EQ(morph_open_close(m, 2), BinaryMask(15, 15));
}

TEST(Morphology, PinholeClosed) {
    BinaryMask m(40, 40);
    for (int y = 10; y < 30; ++y)
        for (int x = 10; x < 30; ++x) m(x, y) = 1;
    m(20, 20) = 0;
    EXPECT_TRUE(morph_open_close(m, 2)(20, 20));
}

TEST(Morphology, DualityOnInterior) {
    Rng rng(13);
    for (int r : {1, 2, 3}) {
        const auto m = random_mask(rng, 50, 40, 0.6);
        const auto a = erode(mask_not(m), r);
        const auto b = mask_not(dilate(m, r));
        for (int y = r; y < 40 - r; ++y)
            for (int x = r; x < 50 - r; ++x) EXPECT_EQ(a(x, y), b(x, y));
    }
}

TEST(Morphology, RadiusValidation) { EXPECT_THROW(morph_open_close(BinaryMask(3, 3), 0), Error); }

TEST(FillHoles, RingBecomesDisk) {
    const auto outer = disk_mask(41, 41, 20, 20, 15);
    const auto inner = disk_mask(41, 41, 20, 20, 8);
    BinaryMask ring(41, 41);
    for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = outer[i] && !inner[i];
    EXPECT_EQ(fill_holes(ring), outer);
}

TEST(FillHoles, EmptyAndTwoCavities) {
    EXPECT_EQ(fill_holes(BinaryMask(9, 9)), BinaryMask(9, 9));
    BinaryMask m(30, 12);
    for (int y = 2; y < 10; ++y)
        for (int x = 2; x < 28; ++x) m(x, y) = 1;
    m(6, 6) = 0;
    m(7, 6) = 0;
    m(20, 5) = 0;
    const auto f = fill_holes(m);
    EXPECT_TRUE(f(6, 6) && f(7, 6) && f(20, 5));
    EXPECT_FALSE(f(0, 0));
    EXPECT_FALSE(f(29, 11));
    EXPECT_EQ(popcount(f), 26u * 8u);
}

TEST(FillHoles, Idempotent) {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_mask(rng, 32, 32, 0.55);
        const auto once = fill_holes(m);
        EXPECT_EQ(fill_holes(once), once);
        EXPECT_TRUE(mask_subset(m, once));
    }
}

TEST(Components, FourConnectivity) {
    BinaryMask m(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1; // diagonal only: separate component
    m(3, 3) = 1;
    m(3, 2) = 1;
    const auto c = label_components(m);
    EXPECT_EQ(c.areas.size(), 3u);
    EXPECT_EQ(popcount(keep_components(m, 2)), 2u);
}

TEST(LungMask, PhantomRecovery) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto t = phantom::generate(one_blob(seed));
        const auto lung = lung_mask(split_artifact(t.image).lung);
        const double truth = static_cast<double>(popcount(t.lung_mask));
        EXPECT_NEAR(static_cast<double>(popcount(lung)), truth, 0.05 * truth);
        EXPECT_GE(dice(lung, t.lung_mask), 0.9);
    }
}

TEST(LungMask, NoLungInBlackImage) {
    EXPECT_THROW(lung_mask(GrayImage(64, 64, 0)), NoLungDetected);
    try {
        lung_mask(GrayImage(64, 64, 0));
    } catch (const NoLungDetected& e) {
        EXPECT_STREQ(e.what(), "no lung detected");
    }
}

TEST(ExtractInfection, SingleBlobDice) {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const auto p = prepare(one_blob(seed));
        const auto inf = extract_infection(p.lung_img, p.lung, p.t);
        EXPECT_GE(dice(inf, p.truth.infection_mask), 0.85);
        EXPECT_TRUE(mask_subset(inf, p.lung));
    }
}

TEST(ExtractInfection, LargeInfectionSplitAcrossClasses) {
    // Big lesions pull Otsu cuts into the bright mode; the seed group must
    // still cover the whole lesion.
    auto spec = phantom::standard_spec(31);
    spec.infection_blobs.push_back({spec.lungs[0].cx, spec.lungs[0].cy, 60.0});
    spec.infection_blobs.push_back({spec.lungs[1].cx, spec.lungs[1].cy, 60.0});
    for (int k = 1; k <= 4; ++k) {
        const auto p = prepare(spec, k);
        EXPECT_GE(dice(extract_infection(p.lung_img, p.lung, p.t), p.truth.infection_mask), 0.85) << "k=" << k;
    }
}

TEST(ExtractInfection, HealthyLungGivesEmptyMask) {
    for (std::uint64_t seed : {41u, 42u, 43u, 44u}) {
        for (int k = 1; k <= 3; ++k) {
            const auto p = prepare(phantom::standard_spec(seed), k);
            EXPECT_EQ(popcount(extract_infection(p.lung_img, p.lung, p.t)), 0u) << "seed " << seed << " k " << k;
        }
    }
}

TEST(ExtractInfection, ContainedInLungAndDeterministic) {
    Rng rng(15);
    const auto p = prepare(one_blob(51));
    for (int trial = 0; trial < 5; ++trial) {
        // Arbitrary thresholds and a random sub-lung still respect containment.
        BinaryMask lung = p.lung;
        for (std::size_t i = 0; i < lung.size(); ++i)
            if (lung[i] && rng.bernoulli(0.02)) lung[i] = 0;
        const ThresholdVector t{static_cast<int>(rng.uniform_int(10, 100)), 150};
        const auto a = extract_infection(p.lung_img, lung, t);
        EXPECT_TRUE(mask_subset(a, lung));
        EXPECT_EQ(a, extract_infection(p.lung_img, lung, t));
    }
    EXPECT_THROW(extract_infection(p.lung_img, BinaryMask(p.lung.width(), p.lung.height()), p.t), NoLungDetected);
}

TEST(InfectionClass, GapRule) {
    // Two clean modes: the highest class alone.
    GrayImage img(4, 1, std::vector<std::uint8_t>{20, 30, 40, 120});
    const BinaryMask all(4, 1, 1);
    EXPECT_EQ(infection_class(img, all, {25, 35, 80}), 3);
    // Bright mode split in two: both upper classes form the seed.
    GrayImage split(4, 1, std::vector<std::uint8_t>{20, 38, 108, 132});
    EXPECT_EQ(infection_class(split, all, {30, 80, 120}), 2);
    // Evenly spaced means: plain highest-mean rule.
    GrayImage even(4, 1, std::vector<std::uint8_t>{18, 27, 34, 43});
    EXPECT_EQ(infection_class(even, all, {23, 31, 39}), 3);
    EXPECT_EQ(infection_class(img, BinaryMask(4, 1), {100}), -1);
}
