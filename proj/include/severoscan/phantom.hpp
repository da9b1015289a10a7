#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"
#include "severoscan/rng.hpp"

namespace severoscan::phantom {

// One intensity band of the synthetic slice: Gaussian noise around `mean`,
// then clamped to [lo, hi].
struct Band {
    double mean;
    double sigma;
    int lo;
    int hi;
};

// All generator intensities live here. Bone sits at or above 200 so the
// 184 artifact cut always removes it, lung tissue never reaches 184, and the
// background stays at or below the body floor of 5.
inline constexpr Band kBackground{0.0, 3.0, 0, 4};
inline constexpr Band kLungTissue{30.0, 8.0, 6, 54};
inline constexpr Band kBone{220.0, 10.0, 200, 250};
inline constexpr double kInfectionMean = 120.0;
inline constexpr double kInfectionSigma = 12.0;

inline Band infection_band(double mean) {
    const int spread = static_cast<int>(3.0 * kInfectionSigma);
    return {mean, kInfectionSigma, static_cast<int>(std::lround(mean)) - spread,
            static_cast<int>(std::lround(mean)) + spread};
}

struct Ellipse {
    double cx = 0, cy = 0; // center, pixels
    double ax = 1, ay = 1; // semi-axes, pixels

    bool contains(double x, double y) const {
        const double u = (x - cx) / ax, v = (y - cy) / ay;
        return u * u + v * v <= 1.0;
    }
};

struct Blob {
    double cx = 0, cy = 0;
    double radius = 1;
    double intensity_mean = kInfectionMean;

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= radius * radius;
    }
};

struct PhantomSpec {
    int width = 512;
    int height = 512;
    std::uint64_t seed = 0;
    Ellipse body;
    Ellipse lungs[2];
    std::vector<Blob> infection_blobs;
};

struct PhantomTruth {
    GrayImage image;
    BinaryMask body_mask;
    BinaryMask lung_mask;
    BinaryMask infection_mask;
    double true_infection_rate_percent = 0.0;
};

// Canonical chest-like layout scaled to the requested size.
inline PhantomSpec standard_spec(std::uint64_t seed, int width = 512, int height = 512) {
    PhantomSpec s;
    s.width = width;
    s.height = height;
    s.seed = seed;
    const double w = width, h = height;
    s.body = {0.5 * w, 0.5 * h, 0.45 * w, 0.39 * h};
    s.lungs[0] = {0.33 * w, 0.5 * h, 0.135 * w, 0.27 * h};
    s.lungs[1] = {0.67 * w, 0.5 * h, 0.135 * w, 0.27 * h};
    return s;
}

inline void validate(const PhantomSpec& s) {
    if (s.width <= 0 || s.height <= 0) throw Error("phantom dimensions must be positive");
    auto check_ellipse = [](const Ellipse& e) {
        if (!(e.ax > 0.0) || !(e.ay > 0.0)) throw Error("degenerate ellipse");
    };
    check_ellipse(s.body);
    for (const auto& lung : s.lungs) {
        check_ellipse(lung);
        // Extreme points of the lung must lie in the body.
        const double pts[4][2] = {{lung.cx - lung.ax, lung.cy}, {lung.cx + lung.ax, lung.cy},
                                  {lung.cx, lung.cy - lung.ay}, {lung.cx, lung.cy + lung.ay}};
        for (const auto& p : pts)
            if (!s.body.contains(p[0], p[1])) throw Error("lung ellipse outside body");
    }
    for (const auto& b : s.infection_blobs) {
        if (!(b.radius > 0.0)) throw Error("degenerate blob");
        if (!s.lungs[0].contains(b.cx, b.cy) && !s.lungs[1].contains(b.cx, b.cy))
            throw Error("blob outside lung");
        const Band band = infection_band(b.intensity_mean);
        if (band.lo <= kLungTissue.hi || band.hi >= 184 ||
            std::abs(b.intensity_mean - kLungTissue.mean) < 5.0 * kInfectionSigma)
            throw Error("blob intensity too close to lung tissue or bone");
    }
}

inline std::uint8_t draw(Rng& rng, const Band& band) {
    const double v = std::round(band.mean + band.sigma * rng.normal());
    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(v), band.lo, band.hi));
}

// Rasterizes the spec. Masks are the exact analytic shapes (sampled at pixel
// coordinates); the infection is the union of blobs clipped to the lungs.
inline PhantomTruth generate(const PhantomSpec& spec) {
    validate(spec);
    const int w = spec.width, h = spec.height;
    PhantomTruth t{GrayImage(w, h), BinaryMask(w, h), BinaryMask(w, h), BinaryMask(w, h), 0.0};
    Rng rng(spec.seed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x, py = y;
            const bool body = spec.body.contains(px, py);
            const bool lung = spec.lungs[0].contains(px, py) || spec.lungs[1].contains(px, py);
            const Blob* blob = nullptr;
            if (lung)
                for (const auto& b : spec.infection_blobs)
                    if (b.contains(px, py)) {
                        blob = &b;
                        break;
                    }
            t.body_mask(x, y) = body;
            t.lung_mask(x, y) = lung;
            t.infection_mask(x, y) = blob != nullptr;

            const Band band = blob   ? infection_band(blob->intensity_mean)
                              : lung ? kLungTissue
                              : body ? kBone
                                     : kBackground;
            t.image(x, y) = draw(rng, band);
        }
    }
    t.true_infection_rate_percent =
        100.0 * static_cast<double>(popcount(t.infection_mask)) / static_cast<double>(popcount(t.lung_mask));
    return t;
}

// How many infection blobs a patient's slices carry and how large they are.
struct SeverityProfile {
    int min_blobs = 0;
    int max_blobs = 0;
    double min_radius = 0.02; // fractions of the slice width
    double max_radius = 0.04;
};

// Graded severity used by the phantom batch generator: patient 0 carries
// at most one small lesion per slice, later patients more and larger ones.
inline SeverityProfile graded_profile(int patient_index) {
    const int p = std::max(0, patient_index);
    return {p / 3, 1 + p / 2, 0.02 + 0.004 * p, 0.03 + 0.008 * p};
}

// A deterministic series of slices for one patient: the standard layout with
// per-slice jitter of lung size and freshly placed blobs.
inline std::vector<PhantomSpec> patient_series(std::uint64_t patient_seed, const SeverityProfile& profile,
                                               int slices, int width = 512, int height = 512) {
    if (slices < 1) throw Error("series needs at least one slice");
    std::vector<PhantomSpec> out;
    Rng rng(patient_seed);
    for (int s = 0; s < slices; ++s) {
        PhantomSpec spec = standard_spec(rng.next(), width, height);
        const double scale = 0.9 + 0.15 * rng.uniform();
        for (auto& lung : spec.lungs) {
            lung.ax *= scale;
            lung.ay *= scale;
        }
        const int blobs = static_cast<int>(rng.uniform_int(profile.min_blobs, profile.max_blobs));
        for (int b = 0; b < blobs; ++b) {
            const auto& lung = spec.lungs[rng.uniform_int(0, 1)];
            // Center uniformly in the inner 60% of the lung ellipse.
            const double r = 0.6 * std::sqrt(rng.uniform());
            const double phi = 2.0 * 3.14159265358979323846 * rng.uniform();
            Blob blob;
            blob.cx = lung.cx + r * lung.ax * std::cos(phi);
            blob.cy = lung.cy + r * lung.ay * std::sin(phi);
            blob.radius = width * (profile.min_radius + (profile.max_radius - profile.min_radius) * rng.uniform());
            spec.infection_blobs.push_back(blob);
        }
        out.push_back(std::move(spec));
    }
    return out;
}

} // namespace severoscan::phantom
