#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"

namespace severoscan {

using Offsets = std::vector<std::pair<int, int>>;

inline Offsets disk(int radius) {
    if (radius < 0) throw Error("structuring element radius must be >= 0");
    Offsets out;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) out.emplace_back(dx, dy);
    return out;
}

// Pixels outside the image count as false for both operators.
inline BinaryMask erode(const BinaryMask& m, int radius) {
    const auto se = disk(radius);
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            bool keep = true;
            for (auto [dx, dy] : se) {
                const int px = x + dx, py = y + dy;
                if (!m.contains(px, py) || !m(px, py)) {
                    keep = false;
                    break;
                }
            }
            out(x, y) = keep ? 1 : 0;
        }
    }
    return out;
}

inline BinaryMask dilate(const BinaryMask& m, int radius) {
    const auto se = disk(radius);
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            for (auto [dx, dy] : se) {
                const int px = x + dx, py = y + dy;
                if (m.contains(px, py)) out(px, py) = 1;
            }
        }
    }
    return out;
}

inline BinaryMask open(const BinaryMask& m, int radius) { return dilate(erode(m, radius), radius); }
inline BinaryMask close(const BinaryMask& m, int radius) { return erode(dilate(m, radius), radius); }

// Opening to drop specks, then closing to seal pits.
inline BinaryMask morph_open_close(const BinaryMask& m, int radius) {
    if (radius < 1) throw Error("morph radius must be >= 1");
    return close(open(m, radius), radius);
}

namespace detail {
inline constexpr int kN4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
}

// 4-connected components of the set pixels, labeled 1..n in raster order of
// their first pixel; background is 0.
struct Components {
    LabelImage labels;
    std::vector<std::size_t> areas; // areas[i] is the size of label i + 1
};

inline Components label_components(const BinaryMask& m) {
    Components c{LabelImage(m.width(), m.height()), {}};
    std::vector<std::pair<int, int>> stack;
    std::int32_t next = 0;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y) || c.labels(x, y) != 0) continue;
            ++next;
            std::size_t area = 0;
            c.labels(x, y) = next;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                for (const auto& d : detail::kN4) {
                    const int nx = cx + d[0], ny = cy + d[1];
                    if (m.contains(nx, ny) && m(nx, ny) && c.labels(nx, ny) == 0) {
                        c.labels(nx, ny) = next;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            c.areas.push_back(area);
        }
    }
    return c;
}

// Keeps 4-connected components whose area is at least min_area.
inline BinaryMask keep_components(const BinaryMask& m, std::size_t min_area) {
    const auto c = label_components(m);
    BinaryMask out(m.width(), m.height());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto l = c.labels[i];
        out[i] = (l > 0 && c.areas[static_cast<std::size_t>(l - 1)] >= min_area) ? 1 : 0;
    }
    return out;
}

// Sets every background region that has no 4-connected path to the border.
inline BinaryMask fill_holes(const BinaryMask& m) {
    const int w = m.width(), h = m.height();
    BinaryMask outside(w, h);
    std::vector<std::pair<int, int>> stack;
    auto seed = [&](int x, int y) {
        if (!m(x, y) && !outside(x, y)) {
            outside(x, y) = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (const auto& d : detail::kN4) {
            const int nx = cx + d[0], ny = cy + d[1];
            if (m.contains(nx, ny)) seed(nx, ny);
        }
    }
    return mask_not(outside);
}

} // namespace severoscan
