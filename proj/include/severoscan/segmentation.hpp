#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"
#include "severoscan/morphology.hpp"
#include "severoscan/objectives.hpp"
#include "severoscan/quantize.hpp"
#include "severoscan/threshold_filter.hpp"
#include "severoscan/watershed.hpp"

namespace severoscan {

struct SegmentationConfig {
    // Infection components smaller than this fraction of the lung are dropped.
    double min_component_fraction = 0.001;
    int morph_radius = 2;
    // Lung components below this fraction of the image are discarded ...
    double lung_component_fraction = 0.01;
    // ... and a surviving lung area below this fraction means no lung.
    double min_lung_fraction = 0.02;
    // Gray floor used to binarize lung content.
    int background_floor = 5;
    // Classes above the widest class-mean gap join the infection seed only
    // when that gap is at least this many times every other gap.
    double seed_gap_ratio = 2.0;

    void validate() const {
        if (!(min_component_fraction >= 0.0 && min_component_fraction < 1.0))
            throw Error("min_component_fraction must be in [0,1)");
        if (morph_radius < 1) throw Error("morph_radius must be >= 1");
        if (!(seed_gap_ratio >= 1.0)) throw Error("seed_gap_ratio must be >= 1");
    }
};

// Automated lung region of a threshold-filtered slice: binarize, fill
// holes, keep large 4-connected components.
inline BinaryMask lung_mask(const GrayImage& lung_img, const SegmentationConfig& cfg = {}) {
    cfg.validate();
    const double image_area = static_cast<double>(lung_img.size());
    const BinaryMask content = mask_where(
        lung_img, [floor = cfg.background_floor](std::uint8_t v) { return v > floor; });
    const auto min_area =
        static_cast<std::size_t>(std::ceil(cfg.lung_component_fraction * image_area));
    BinaryMask lung = keep_components(fill_holes(content), min_area);
    if (static_cast<double>(popcount(lung)) < cfg.min_lung_fraction * image_area)
        throw NoLungDetected();
    return lung;
}

// First class of the infection seed group. By default that is the
// highest-mean nonempty lung class. When the optimizer has split the bright
// mode itself, the class means show one dominant gap (at least
// seed_gap_ratio times every other gap) and all classes above it form the
// seed. Returns -1 when the lung has no mass.
inline int infection_class(const GrayImage& img, const BinaryMask& lung, const ThresholdVector& t,
                           double seed_gap_ratio = SegmentationConfig{}.seed_gap_ratio) {
    const auto h = masked_histogram(img, lung);
    if (h.empty()) return -1;
    const auto means = class_means(h, t);
    std::vector<std::size_t> nonempty;
    for (std::size_t j = 0; j < t.classes(); ++j) {
        std::uint64_t n = 0;
        for (int v = t.class_begin(j); v < t.class_end(j); ++v) n += h.count(v);
        if (n > 0) nonempty.push_back(j);
    }
    const int top = static_cast<int>(nonempty.back());
    if (nonempty.size() < 3) return top;

    std::vector<double> gaps;
    for (std::size_t i = 1; i < nonempty.size(); ++i)
        gaps.push_back(means[nonempty[i]] - means[nonempty[i - 1]]);
    const auto widest = static_cast<std::size_t>(std::max_element(gaps.begin(), gaps.end()) - gaps.begin());
    for (std::size_t i = 0; i < gaps.size(); ++i)
        if (i != widest && gaps[widest] < seed_gap_ratio * gaps[i]) return top;
    return static_cast<int>(nonempty[widest + 1]);
}

// Intermediate rasters of the infection extraction, kept for overlays and
// inspection.
struct InfectionStages {
    LabelImage classes;
    BinaryMask seed;
    LabelImage markers;
    RealImage edges;
    LabelImage basins;
    BinaryMask morphed;
    BinaryMask filled;
    BinaryMask infection;
};

inline constexpr std::int32_t kBackgroundBasin = 1;
inline constexpr std::int32_t kInfectionBasin = 2;

inline InfectionStages extract_infection_stages(const GrayImage& img, const BinaryMask& lung,
                                                const ThresholdVector& t,
                                                const SegmentationConfig& cfg = {}) {
    cfg.validate();
    require_same_shape(img, lung);
    const std::size_t lung_area = popcount(lung);
    if (lung_area == 0) throw NoLungDetected();

    const int w = img.width(), h = img.height();
    InfectionStages s;
    s.classes = class_map(img, t);
    const int seed_class = infection_class(img, lung, t, cfg.seed_gap_ratio);
    s.seed = BinaryMask(w, h);
    for (std::size_t i = 0; i < img.size(); ++i)
        s.seed[i] = (lung[i] && seed_class >= 0 && s.classes[i] >= seed_class) ? 1 : 0;

    // Foreground markers: eroded seed regions at least one structuring
    // element in area; erosion survivors of noise speckle are smaller.
    const BinaryMask fg = keep_components(erode(s.seed, cfg.morph_radius), disk(cfg.morph_radius).size());
    s.infection = BinaryMask(w, h);
    if (popcount(fg) == 0) return s; // healthy: no interior-safe infection seed

    const BinaryMask bg = erode(mask_not(s.seed), cfg.morph_radius);
    s.markers = LabelImage(w, h);
    for (std::size_t i = 0; i < img.size(); ++i)
        s.markers[i] = fg[i] ? kInfectionBasin : (bg[i] ? kBackgroundBasin : 0);

    s.edges = sobel_edges(img);
    s.basins = watershed(s.edges, s.markers);

    BinaryMask region(w, h);
    for (std::size_t i = 0; i < img.size(); ++i)
        region[i] = (lung[i] && s.basins[i] == kInfectionBasin) ? 1 : 0;
    s.morphed = mask_and(morph_open_close(region, cfg.morph_radius), lung);
    s.filled = mask_and(fill_holes(s.morphed), lung);
    const auto min_area = static_cast<std::size_t>(
        std::ceil(cfg.min_component_fraction * static_cast<double>(lung_area)));
    s.infection = keep_components(s.filled, std::max<std::size_t>(min_area, 1));
    return s;
}

inline BinaryMask extract_infection(const GrayImage& img, const BinaryMask& lung,
                                    const ThresholdVector& t, const SegmentationConfig& cfg = {}) {
    return extract_infection_stages(img, lung, t, cfg).infection;
}

} // namespace severoscan
