#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "severoscan/error.hpp"

namespace severoscan {

// Row-major 2D grid. The Tag parameter keeps gray images, masks and label
// rasters from silently converting into one another.
template <typename T, typename Tag = void>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(checked_size(width, height), fill) {}

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != checked_size(width, height))
            throw Error("raster data length does not match dimensions");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    template <typename OtherT, typename OtherTag>
    bool same_shape(const Raster<OtherT, OtherTag>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    static std::size_t checked_size(int width, int height) {
        if (width <= 0 || height <= 0)
            throw Error("raster dimensions must be positive");
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct GrayTag {};
struct MaskTag {};
struct LabelTag {};
struct RealTag {};

// 8-bit single-channel slice.
using GrayImage = Raster<std::uint8_t, GrayTag>;
// Boolean raster stored as 0/1 bytes.
using BinaryMask = Raster<std::uint8_t, MaskTag>;
// Integer labels: class indices, watershed basins, components.
using LabelImage = Raster<std::int32_t, LabelTag>;
// Real-valued raster, e.g. gradient magnitude.
using RealImage = Raster<double, RealTag>;

inline std::size_t popcount(const BinaryMask& mask) {
    std::size_t n = 0;
    for (auto v : mask.pixels()) n += v != 0;
    return n;
}

template <typename T, typename Tag>
BinaryMask mask_where(const Raster<T, Tag>& src, auto predicate) {
    BinaryMask out(src.width(), src.height());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = predicate(src[i]) ? 1 : 0;
    return out;
}

inline void require_same_shape(const auto& a, const auto& b) {
    if (!a.same_shape(b)) throw Error("dimension mismatch");
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
    return out;
}

inline BinaryMask mask_not(const BinaryMask& a) {
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ? 0 : 1;
    return out;
}

// True when every set pixel of `inner` is also set in `outer`.
inline bool mask_subset(const BinaryMask& inner, const BinaryMask& outer) {
    require_same_shape(inner, outer);
    for (std::size_t i = 0; i < inner.size(); ++i)
        if (inner[i] && !outer[i]) return false;
    return true;
}

inline double dice(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    std::size_t both = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] != 0;
        nb += b[i] != 0;
        both += (a[i] && b[i]);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

template <typename T, typename Tag>
Raster<T, Tag> transpose(const Raster<T, Tag>& src) {
    Raster<T, Tag> out(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) out(y, x) = src(x, y);
    return out;
}

// Gray-level counts with cached total.
class Histogram {
public:
    static constexpr int kBins = 256;

    Histogram() { counts_.fill(0); }

    explicit Histogram(const std::array<std::uint64_t, kBins>& counts) : counts_(counts) {
        total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    }

    std::uint64_t count(int level) const { return counts_.at(static_cast<std::size_t>(level)); }
    const std::array<std::uint64_t, kBins>& counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }
    bool empty() const noexcept { return total_ == 0; }

    double probability(int level) const {
        return total_ == 0 ? 0.0
                           : static_cast<double>(count(level)) / static_cast<double>(total_);
    }

    std::array<double, kBins> probabilities() const {
        std::array<double, kBins> p{};
        for (int i = 0; i < kBins; ++i) p[static_cast<std::size_t>(i)] = probability(i);
        return p;
    }

    void add(std::uint8_t level, std::uint64_t n = 1) {
        counts_[level] += n;
        total_ += n;
    }

    double mean() const {
        if (total_ == 0) return 0.0;
        double s = 0.0;
        for (int i = 0; i < kBins; ++i) s += static_cast<double>(i) * static_cast<double>(counts_[static_cast<std::size_t>(i)]);
        return s / static_cast<double>(total_);
    }

    double variance() const {
        if (total_ == 0) return 0.0;
        const double mu = mean();
        double v = 0.0;
        for (int i = 0; i < kBins; ++i) {
            const double d = i - mu;
            v += d * d * static_cast<double>(counts_[static_cast<std::size_t>(i)]);
        }
        return v / static_cast<double>(total_);
    }

    friend bool operator==(const Histogram&, const Histogram&) = default;

private:
    std::array<std::uint64_t, kBins> counts_{};
    std::uint64_t total_ = 0;
};

inline Histogram histogram(const GrayImage& img) {
    Histogram h;
    for (auto v : img.pixels()) h.add(v);
    return h;
}

inline Histogram masked_histogram(const GrayImage& img, const BinaryMask& mask) {
    require_same_shape(img, mask);
    Histogram h;
    for (std::size_t i = 0; i < img.size(); ++i)
        if (mask[i]) h.add(img[i]);
    return h;
}

// Keeps pixels under the mask, zeroes the rest.
inline GrayImage pixel_multiply(const GrayImage& img, const BinaryMask& mask) {
    require_same_shape(img, mask);
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = mask[i] ? img[i] : 0;
    return out;
}

inline GrayImage mask_to_gray(const BinaryMask& mask) {
    GrayImage out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
    return out;
}

inline BinaryMask gray_to_mask(const GrayImage& img) {
    return mask_where(img, [](std::uint8_t v) { return v >= 128; });
}

} // namespace severoscan
