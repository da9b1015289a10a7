#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <tuple>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"

namespace severoscan {

// 3x3 Sobel gradient magnitude, borders replicated.
inline RealImage sobel_edges(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    RealImage out(w, h);
    auto at = [&](int x, int y) {
        x = x < 0 ? 0 : (x >= w ? w - 1 : x);
        y = y < 0 ? 0 : (y >= h ? h - 1 : y);
        return static_cast<double>(img(x, y));
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

// Marker-driven priority flood (Meyer). Nonzero marker pixels keep their
// label; every other pixel takes the label of the basin that first pushes it,
// visiting pixels in ascending gradient order with insertion order breaking
// ties. Flooding uses 8-connectivity.
inline LabelImage watershed(const RealImage& gradient, const LabelImage& markers) {
    require_same_shape(gradient, markers);
    const int w = gradient.width(), h = gradient.height();
    LabelImage labels = markers;

    using Entry = std::tuple<double, std::uint64_t, std::int32_t, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::uint64_t seq = 0;
    bool any = false;

    auto push_neighbours = [&](int x, int y) {
        const std::int32_t label = labels(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!labels.contains(nx, ny) || labels(nx, ny) != 0) continue;
                labels(nx, ny) = label;
                queue.emplace(gradient(nx, ny), seq++, nx, ny);
            }
        }
    };

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (markers(x, y) != 0) any = true;
    if (!any) throw Error("watershed needs at least one marker");

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (markers(x, y) != 0) push_neighbours(x, y);

    while (!queue.empty()) {
        const auto [g, s, x, y] = queue.top();
        queue.pop();
        push_neighbours(x, y);
    }
    return labels;
}

} // namespace severoscan
