#pragma once

#include <cstdint>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"

namespace severoscan {

struct FilterConfig {
    // Pixels at or above this level are bone/artifact; strictly below is lung.
    int artifact_threshold = 184;
    // body_mask keeps pixels strictly brighter than this.
    int background_floor = 5;

    void validate() const {
        if (artifact_threshold < 1 || artifact_threshold > 255)
            throw Error("artifact_threshold must be in [1,255]");
        if (background_floor < 0 || background_floor > 254)
            throw Error("background_floor must be in [0,254]");
    }
};

struct ArtifactSplit {
    GrayImage lung;
    GrayImage artifact;
};

inline ArtifactSplit split_artifact(const GrayImage& img, const FilterConfig& cfg = {}) {
    cfg.validate();
    ArtifactSplit out{GrayImage(img.width(), img.height()), GrayImage(img.width(), img.height())};
    for (std::size_t i = 0; i < img.size(); ++i) {
        const std::uint8_t v = img[i];
        if (v < cfg.artifact_threshold)
            out.lung[i] = v;
        else
            out.artifact[i] = v;
    }
    return out;
}

inline BinaryMask body_mask(const GrayImage& img, const FilterConfig& cfg = {}) {
    cfg.validate();
    return mask_where(img, [floor = cfg.background_floor](std::uint8_t v) { return v > floor; });
}

} // namespace severoscan
