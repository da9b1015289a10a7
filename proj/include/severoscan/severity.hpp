#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"
#include "severoscan/objectives.hpp"

namespace severoscan {

struct SliceReport {
    std::string slice_id;
    std::uint64_t infection_pixels = 0;
    std::uint64_t lung_pixels = 0;
    double infection_rate_percent = 0.0;
    ThresholdVector thresholds_used;
    ObjectiveValue objective_value;
    std::vector<std::string> flags; // "no_infection", "no_lung"

    bool has_flag(const std::string& f) const {
        return std::find(flags.begin(), flags.end(), f) != flags.end();
    }
};

struct PatientReport {
    std::string patient_id;
    std::vector<SliceReport> slices;
    double mean_infection_rate_percent = 0.0;
    int rank = 0;
};

// Infection rate from raw pixel densities: 100 * infected / lung.
inline double infection_rate_percent(std::uint64_t infection_pixels, std::uint64_t lung_pixels) {
    if (lung_pixels == 0) throw NoLungDetected();
    if (infection_pixels > lung_pixels) throw Error("infection exceeds lung area");
    return 100.0 * static_cast<double>(infection_pixels) / static_cast<double>(lung_pixels);
}

inline SliceReport slice_severity(const BinaryMask& infection, const BinaryMask& lung) {
    require_same_shape(infection, lung);
    SliceReport r;
    r.lung_pixels = popcount(lung);
    if (r.lung_pixels == 0) throw NoLungDetected();
    if (!mask_subset(infection, lung)) throw Error("infection mask is not contained in lung mask");
    r.infection_pixels = popcount(infection);
    r.infection_rate_percent = infection_rate_percent(r.infection_pixels, r.lung_pixels);
    if (r.infection_pixels == 0) r.flags.emplace_back("no_infection");
    return r;
}

// Arithmetic mean over slices that have a lung; slices flagged no_lung
// carry no rate and are skipped.
inline PatientReport patient_mean(std::string patient_id, std::vector<SliceReport> slices) {
    if (slices.empty()) throw Error("patient has no slices");
    PatientReport p{std::move(patient_id), std::move(slices), 0.0, 0};
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : p.slices) {
        if (s.has_flag("no_lung")) continue;
        sum += s.infection_rate_percent;
        ++n;
    }
    p.mean_infection_rate_percent = n > 0 ? sum / static_cast<double>(n) : 0.0;
    return p;
}

// Most severe first; equal means ordered by patient id. Assigns rank 1..n.
inline std::vector<PatientReport> triage_rank(std::vector<PatientReport> patients) {
    std::stable_sort(patients.begin(), patients.end(), [](const PatientReport& a, const PatientReport& b) {
        if (a.mean_infection_rate_percent != b.mean_infection_rate_percent)
            return a.mean_infection_rate_percent > b.mean_infection_rate_percent;
        return a.patient_id < b.patient_id;
    });
    for (std::size_t i = 0; i < patients.size(); ++i) patients[i].rank = static_cast<int>(i) + 1;
    return patients;
}

// Two-decimal percentage as typed in human-readable output, e.g. "14.51%".
inline std::string format_percent(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", rate);
    return buf;
}

} // namespace severoscan
