#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"
#include "severoscan/objectives.hpp"
#include "severoscan/rng.hpp"

namespace severoscan {

struct HarmonyParams {
    int hms = 20;                 // harmony memory size
    double hmcr = 0.9;            // memory considering rate
    double par = 0.3;             // pitch adjusting rate
    int bw = 2;                   // pitch bandwidth, gray levels
    int max_improvisations = 2000;
    std::uint64_t seed = 42;
    int k = 3;                    // number of thresholds
    bool record_trace = false;

    void validate() const {
        if (hms < 2) throw Error("hms must be >= 2");
        if (!(hmcr >= 0.0 && hmcr <= 1.0)) throw Error("hmcr must be in [0,1]");
        if (!(par >= 0.0 && par <= 1.0)) throw Error("par must be in [0,1]");
        if (bw < 1) throw Error("bw must be >= 1");
        if (max_improvisations < 1) throw Error("max_improvisations must be >= 1");
        if (k < 1 || k > kMaxThresholds) throw Error("k must be in [1,8]");
    }
};

struct SearchResult {
    ThresholdVector best;
    ObjectiveValue best_value;
    std::uint64_t evaluations = 0;
    std::vector<double> trace;

    friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

struct Harmony {
    std::vector<int> cuts;
    double value = 0.0;
};

// Turns k raw gray values into a valid ThresholdVector: clamp to [1,254],
// sort, bump each duplicate one level above its predecessor, and if that
// runs past 254 push the tail back down from the ceiling.
inline ThresholdVector repair(std::vector<int> raw) {
    if (raw.empty()) throw Error("repair needs at least one value");
    if (raw.size() > static_cast<std::size_t>(kMaxCut - kMinCut + 1))
        throw Error("too many thresholds to fit in [1,254]");
    for (int& v : raw) v = std::clamp(v, kMinCut, kMaxCut);
    std::sort(raw.begin(), raw.end());
    for (std::size_t i = 1; i < raw.size(); ++i)
        if (raw[i] <= raw[i - 1]) raw[i] = raw[i - 1] + 1;
    if (raw.back() > kMaxCut) {
        raw.back() = kMaxCut;
        for (std::size_t i = raw.size() - 1; i-- > 0;)
            if (raw[i] >= raw[i + 1]) raw[i] = raw[i + 1] - 1;
    }
    return ThresholdVector(std::move(raw));
}

// Slides every cut down across empty histogram bins. The class partition of
// the histogram mass is unchanged, so the objective value is bit-identical,
// and the result is the lexicographically smallest vector for that partition.
inline ThresholdVector canonicalize(const Histogram& h, const ThresholdVector& t) {
    std::vector<int> cuts = t.levels();
    for (std::size_t j = 0; j < cuts.size(); ++j) {
        const int floor = j == 0 ? kMinCut : cuts[j - 1] + 1;
        while (cuts[j] > floor && h.count(cuts[j] - 1) == 0) --cuts[j];
    }
    return ThresholdVector(std::move(cuts));
}

namespace detail {

inline bool better(double value, const std::vector<int>& cuts, double ref_value,
                   const std::vector<int>& ref_cuts) {
    return value > ref_value || (value == ref_value && cuts < ref_cuts);
}

struct NoObserver {
    void operator()(std::span<const Harmony>) const noexcept {}
};

} // namespace detail

// Harmony Search over integer threshold vectors. The observer, if given, is
// called with the harmony memory after initialization and after every
// improvisation.
template <typename Observer = detail::NoObserver>
SearchResult hso_maximize(const Histogram& h, ObjectiveKind objective, const HarmonyParams& params,
                          Observer&& observer = {}) {
    params.validate();
    const ObjectiveEvaluator eval(h);
    Rng rng(params.seed);
    const auto k = static_cast<std::size_t>(params.k);

    std::vector<Harmony> memory;
    memory.reserve(static_cast<std::size_t>(params.hms));
    std::vector<int> raw(k);
    for (int i = 0; i < params.hms; ++i) {
        for (auto& v : raw) v = static_cast<int>(rng.uniform_int(kMinCut, kMaxCut));
        auto cuts = repair(raw).levels();
        const double value = eval.evaluate(objective, cuts);
        memory.push_back({std::move(cuts), value});
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < memory.size(); ++i)
        if (detail::better(memory[i].value, memory[i].cuts, memory[best].value, memory[best].cuts))
            best = i;
    Harmony best_harmony = memory[best];
    std::uint64_t evaluations = memory.size();
    observer(std::span<const Harmony>(memory));

    SearchResult result;
    if (params.record_trace) result.trace.reserve(static_cast<std::size_t>(params.max_improvisations));

    const auto hms = static_cast<std::int64_t>(params.hms);
    for (int it = 0; it < params.max_improvisations; ++it) {
        for (std::size_t d = 0; d < k; ++d) {
            int v;
            if (rng.bernoulli(params.hmcr)) {
                v = memory[static_cast<std::size_t>(rng.uniform_int(0, hms - 1))].cuts[d];
                if (rng.bernoulli(params.par)) {
                    const int step = static_cast<int>(rng.uniform_int(1, params.bw));
                    v += rng.bernoulli(0.5) ? step : -step;
                }
            } else {
                v = static_cast<int>(rng.uniform_int(kMinCut, kMaxCut));
            }
            raw[d] = v;
        }
        auto cuts = repair(raw).levels();
        const double value = eval.evaluate(objective, cuts);
        ++evaluations;

        // Worst entry: lowest value; among equals, the lexicographically largest.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < memory.size(); ++i)
            if (detail::better(memory[worst].value, memory[worst].cuts, memory[i].value, memory[i].cuts))
                worst = i;
        if (value > memory[worst].value) memory[worst] = {cuts, value};
        if (detail::better(value, cuts, best_harmony.value, best_harmony.cuts))
            best_harmony = {std::move(cuts), value};

        if (params.record_trace) result.trace.push_back(best_harmony.value);
        observer(std::span<const Harmony>(memory));
    }

    result.best = canonicalize(h, ThresholdVector(best_harmony.cuts));
    result.best_value = {eval.evaluate(objective, result.best.levels()), objective};
    result.evaluations = evaluations;
    return result;
}

// Brute-force oracle: every strictly increasing k-tuple over [1,254] in
// lexicographic order; the first maximum wins ties.
inline SearchResult exhaustive_best(const Histogram& h, ObjectiveKind objective, int k) {
    if (k < 1 || k > 3) throw Error("exhaustive search supports k in [1,3]");
    const ObjectiveEvaluator eval(h);
    std::vector<int> cuts(static_cast<std::size_t>(k));
    std::vector<int> best_cuts;
    double best_value = -1.0;
    std::uint64_t evaluations = 0;

    auto visit = [&] {
        const double v = eval.evaluate(objective, cuts);
        ++evaluations;
        if (best_cuts.empty() || v > best_value) {
            best_value = v;
            best_cuts = cuts;
        }
    };

    // Iterative odometer over strictly increasing tuples.
    for (int i = 0; i < k; ++i) cuts[static_cast<std::size_t>(i)] = kMinCut + i;
    for (;;) {
        visit();
        int pos = k - 1;
        while (pos >= 0 && cuts[static_cast<std::size_t>(pos)] == kMaxCut - (k - 1 - pos)) --pos;
        if (pos < 0) break;
        ++cuts[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            cuts[static_cast<std::size_t>(i)] = cuts[static_cast<std::size_t>(i) - 1] + 1;
    }

    SearchResult result;
    result.best = ThresholdVector(best_cuts);
    result.best_value = {best_value, objective};
    result.evaluations = evaluations;
    return result;
}

} // namespace severoscan
