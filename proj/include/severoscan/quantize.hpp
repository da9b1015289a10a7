#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "severoscan/image.hpp"
#include "severoscan/objectives.hpp"

namespace severoscan {

// Per-class index raster, class j = [t_j, t_{j+1}).
inline LabelImage class_map(const GrayImage& img, const ThresholdVector& t) {
    std::array<std::int32_t, Histogram::kBins> lut{};
    for (int v = 0; v < Histogram::kBins; ++v)
        lut[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(t.class_of(v));
    LabelImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = lut[img[i]];
    return out;
}

// Mean gray level of each class under histogram h. A class with no mass in h
// gets the midpoint of its gray range.
inline std::vector<double> class_means(const Histogram& h, const ThresholdVector& t) {
    std::vector<double> means(t.classes());
    for (std::size_t j = 0; j < t.classes(); ++j) {
        const int begin = t.class_begin(j);
        const int end = t.class_end(j);
        std::uint64_t n = 0, s = 0;
        for (int v = begin; v < end; ++v) {
            n += h.count(v);
            s += h.count(v) * static_cast<std::uint64_t>(v);
        }
        means[j] = n > 0 ? static_cast<double>(s) / static_cast<double>(n)
                         : 0.5 * (begin + end - 1);
    }
    return means;
}

// Replaces every pixel by the rounded mean of its class.
inline GrayImage quantize(const GrayImage& img, const ThresholdVector& t, const Histogram& h) {
    const auto means = class_means(h, t);
    std::array<std::uint8_t, Histogram::kBins> lut{};
    for (int v = 0; v < Histogram::kBins; ++v)
        lut[static_cast<std::size_t>(v)] =
            static_cast<std::uint8_t>(std::lround(means[t.class_of(v)]));
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = lut[img[i]];
    return out;
}

} // namespace severoscan
