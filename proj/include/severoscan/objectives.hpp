#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"

namespace severoscan {

inline constexpr int kMinCut = 1;
inline constexpr int kMaxCut = 254;
inline constexpr int kMaxThresholds = 8;

// Strictly increasing gray-level cuts in [1,254]. Cut t_j opens class j:
// level v is in class j iff t_j <= v < t_{j+1}, with t_0 = 0 and t_{k+1} = 256.
class ThresholdVector {
public:
    ThresholdVector() = default;

    explicit ThresholdVector(std::vector<int> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) throw Error("threshold vector must hold at least one level");
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (levels_[i] < kMinCut || levels_[i] > kMaxCut)
                throw Error("threshold level outside [1,254]");
            if (i > 0 && levels_[i] <= levels_[i - 1])
                throw Error("threshold levels must be strictly increasing");
        }
    }

    ThresholdVector(std::initializer_list<int> levels) : ThresholdVector(std::vector<int>(levels)) {}

    std::size_t size() const noexcept { return levels_.size(); }
    int operator[](std::size_t i) const { return levels_[i]; }
    const std::vector<int>& levels() const noexcept { return levels_; }
    std::size_t classes() const noexcept { return levels_.size() + 1; }

    // Inclusive-exclusive gray range of class j.
    int class_begin(std::size_t j) const { return j == 0 ? 0 : levels_[j - 1]; }
    int class_end(std::size_t j) const { return j == levels_.size() ? 256 : levels_[j]; }

    std::size_t class_of(int level) const {
        return static_cast<std::size_t>(
            std::upper_bound(levels_.begin(), levels_.end(), level) - levels_.begin());
    }

    friend bool operator==(const ThresholdVector&, const ThresholdVector&) = default;
    friend auto operator<=>(const ThresholdVector& a, const ThresholdVector& b) {
        return a.levels_ <=> b.levels_;
    }

private:
    std::vector<int> levels_;
};

enum class ObjectiveKind { otsu, kapur };

inline std::string_view to_string(ObjectiveKind kind) {
    return kind == ObjectiveKind::otsu ? "otsu" : "kapur";
}

inline ObjectiveKind parse_objective(std::string_view name) {
    if (name == "otsu") return ObjectiveKind::otsu;
    if (name == "kapur") return ObjectiveKind::kapur;
    throw Error("unknown objective: " + std::string(name));
}

struct ObjectiveValue {
    double value = 0.0;
    ObjectiveKind kind = ObjectiveKind::otsu;

    friend bool operator==(const ObjectiveValue&, const ObjectiveValue&) = default;
};

// Cumulative integer moments of a histogram, so any class's mass and mean
// come out exactly regardless of where empty bins put the cut.
class ObjectiveEvaluator {
public:
    explicit ObjectiveEvaluator(const Histogram& h) : counts_(h.counts()) {
        if (h.empty()) throw Error("empty histogram");
        cum_count_[0] = 0;
        cum_sum_[0] = 0;
        for (int i = 0; i < Histogram::kBins; ++i) {
            const auto c = counts_[static_cast<std::size_t>(i)];
            cum_count_[static_cast<std::size_t>(i) + 1] = cum_count_[static_cast<std::size_t>(i)] + c;
            cum_sum_[static_cast<std::size_t>(i) + 1] =
                cum_sum_[static_cast<std::size_t>(i)] + c * static_cast<std::uint64_t>(i);
        }
        total_ = cum_count_[Histogram::kBins];
    }

    std::uint64_t total() const noexcept { return total_; }

    double evaluate(ObjectiveKind kind, std::span<const int> cuts) const {
        return kind == ObjectiveKind::otsu ? otsu(cuts) : kapur(cuts);
    }

    // Between-class variance  sum_j w_j (mu_j - mu_T)^2.
    double otsu(std::span<const int> cuts) const {
        const double n_total = static_cast<double>(total_);
        const double mu_total = static_cast<double>(cum_sum_[Histogram::kBins]) / n_total;
        double sigma = 0.0;
        int begin = 0;
        for (std::size_t j = 0; j <= cuts.size(); ++j) {
            const int end = j == cuts.size() ? Histogram::kBins : cuts[j];
            const auto n = cum_count_[static_cast<std::size_t>(end)] - cum_count_[static_cast<std::size_t>(begin)];
            if (n > 0) {
                const auto s = cum_sum_[static_cast<std::size_t>(end)] - cum_sum_[static_cast<std::size_t>(begin)];
                const double mu = static_cast<double>(s) / static_cast<double>(n);
                const double d = mu - mu_total;
                sigma += (static_cast<double>(n) / n_total) * d * d;
            }
            begin = end;
        }
        return sigma;
    }

    // Sum of per-class Shannon entropies, each class renormalized by its
    // mass. Uses H_j = ln n_j - (1/n_j) sum c_i ln c_i over integer counts.
    double kapur(std::span<const int> cuts) const {
        double entropy = 0.0;
        int begin = 0;
        for (std::size_t j = 0; j <= cuts.size(); ++j) {
            const int end = j == cuts.size() ? Histogram::kBins : cuts[j];
            const auto n = cum_count_[static_cast<std::size_t>(end)] - cum_count_[static_cast<std::size_t>(begin)];
            if (n > 0) {
                double clogc = 0.0;
                for (int i = begin; i < end; ++i) {
                    const auto c = counts_[static_cast<std::size_t>(i)];
                    if (c > 0) {
                        const double cd = static_cast<double>(c);
                        clogc += cd * std::log(cd);
                    }
                }
                const double nd = static_cast<double>(n);
                entropy += std::max(0.0, std::log(nd) - clogc / nd);
            }
            begin = end;
        }
        return entropy;
    }

private:
    std::array<std::uint64_t, Histogram::kBins> counts_{};
    std::array<std::uint64_t, Histogram::kBins + 1> cum_count_{};
    std::array<std::uint64_t, Histogram::kBins + 1> cum_sum_{};
    std::uint64_t total_ = 0;
};

inline ObjectiveValue otsu_between_class(const Histogram& h, const ThresholdVector& t) {
    return {ObjectiveEvaluator(h).otsu(t.levels()), ObjectiveKind::otsu};
}

inline ObjectiveValue kapur_entropy(const Histogram& h, const ThresholdVector& t) {
    return {ObjectiveEvaluator(h).kapur(t.levels()), ObjectiveKind::kapur};
}

inline ObjectiveValue evaluate_objective(ObjectiveKind kind, const Histogram& h, const ThresholdVector& t) {
    return kind == ObjectiveKind::otsu ? otsu_between_class(h, t) : kapur_entropy(h, t);
}

} // namespace severoscan
