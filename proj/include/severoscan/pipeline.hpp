#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "severoscan/error.hpp"
#include "severoscan/harmony_search.hpp"
#include "severoscan/image.hpp"
#include "severoscan/objectives.hpp"
#include "severoscan/pgm.hpp"
#include "severoscan/quantize.hpp"
#include "severoscan/rng.hpp"
#include "severoscan/segmentation.hpp"
#include "severoscan/severity.hpp"
#include "severoscan/threshold_filter.hpp"

namespace severoscan {

inline constexpr const char* kVersion = "1.0.0";

struct AnalysisConfig {
    FilterConfig filter;
    HarmonyParams hso;
    ObjectiveKind objective = ObjectiveKind::otsu;
    SegmentationConfig segmentation;
    unsigned jobs = 0; // 0 = hardware concurrency

    void validate() const {
        filter.validate();
        hso.validate();
        segmentation.validate();
    }
};

inline nlohmann::ordered_json config_json(const AnalysisConfig& c) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["objective"] = to_string(c.objective);
    j["thresholds"] = c.hso.k;
    j["artifact_threshold"] = c.filter.artifact_threshold;
    j["background_floor"] = c.filter.background_floor;
    j["hms"] = c.hso.hms;
    j["hmcr"] = c.hso.hmcr;
    j["par"] = c.hso.par;
    j["bw"] = c.hso.bw;
    j["iters"] = c.hso.max_improvisations;
    j["seed"] = c.hso.seed;
    j["slice_seed_rule"] = "seed xor fnv1a64(slice_id)";
    j["min_component_fraction"] = c.segmentation.min_component_fraction;
    j["morph_radius"] = c.segmentation.morph_radius;
    j["lung_component_fraction"] = c.segmentation.lung_component_fraction;
    j["min_lung_fraction"] = c.segmentation.min_lung_fraction;
    j["infection_class_rule"] = "highest-mean class within lung";
    j["lung_mask_source"] = "automated";
    return j;
}

inline std::uint64_t slice_seed(std::uint64_t seed, const std::string& slice_id) {
    return seed ^ fnv1a64(slice_id);
}

// Everything one slice produces; rasters are empty when the lung was missing.
struct SliceOutcome {
    SliceReport report;
    ThresholdVector alternative_thresholds;
    ObjectiveValue alternative_value;
    BinaryMask lung;
    BinaryMask infection;
    GrayImage enhanced;
    GrayImage extracted;
};

inline SliceOutcome analyze_slice(const GrayImage& img, const std::string& slice_id,
                                  const AnalysisConfig& cfg) {
    SliceOutcome out;
    out.report.slice_id = slice_id;
    const auto split = split_artifact(img, cfg.filter);
    try {
        out.lung = lung_mask(split.lung, cfg.segmentation);
    } catch (const NoLungDetected&) {
        out.report.flags.emplace_back("no_lung");
        out.report.objective_value.kind = cfg.objective;
        return out;
    }

    const Histogram h = masked_histogram(split.lung, out.lung);
    HarmonyParams params = cfg.hso;
    params.seed = slice_seed(cfg.hso.seed, slice_id);
    const SearchResult search = hso_maximize(h, cfg.objective, params);

    const ObjectiveKind other =
        cfg.objective == ObjectiveKind::otsu ? ObjectiveKind::kapur : ObjectiveKind::otsu;
    const SearchResult alt = hso_maximize(h, other, params);
    out.alternative_thresholds = alt.best;
    out.alternative_value = alt.best_value;

    out.enhanced = quantize(split.lung, search.best, h);
    out.infection = extract_infection(split.lung, out.lung, search.best, cfg.segmentation);
    out.extracted = pixel_multiply(img, out.infection);

    SliceReport rates = slice_severity(out.infection, out.lung);
    rates.slice_id = slice_id;
    rates.thresholds_used = search.best;
    rates.objective_value = search.best_value;
    out.report = std::move(rates);
    return out;
}

struct SliceInput {
    std::string patient_id;
    std::string slice_id;
    std::filesystem::path path;
};

// input/<patient_id>/<slice>.pgm, patients and slices in name order.
inline std::vector<SliceInput> scan_input(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw FormatError("input directory does not exist: " + root.string());
    std::vector<fs::path> patients;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) patients.push_back(e.path());
    std::sort(patients.begin(), patients.end());
    if (patients.empty()) throw FormatError("no patient directories under " + root.string());

    std::vector<SliceInput> out;
    for (const auto& p : patients) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(p)) {
            if (!e.is_regular_file()) continue;
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (ext == ".pgm" || ext == ".png") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw FormatError("patient directory holds no slices: " + p.string());
        const std::string pid = p.filename().string();
        for (const auto& f : files) out.push_back({pid, pid + "/" + f.stem().string(), f});
    }
    return out;
}

struct BatchResult {
    std::vector<PatientReport> patients; // triage order
    std::vector<SliceOutcome> outcomes;  // input order
    std::vector<SliceInput> inputs;
    bool any_no_lung = false;
};

// Runs every slice (in parallel workers) and reduces to ranked patients.
inline BatchResult analyze_images(const std::vector<SliceInput>& inputs, const std::vector<GrayImage>& images,
                                  const AnalysisConfig& cfg) {
    cfg.validate();
    BatchResult batch;
    batch.inputs = inputs;
    batch.outcomes.resize(inputs.size());

    unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(inputs.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            try {
                batch.outcomes[i] = analyze_slice(images[i], inputs[i].slice_id, cfg);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<PatientReport> patients;
    for (std::size_t i = 0; i < inputs.size();) {
        std::size_t end = i;
        std::vector<SliceReport> slices;
        while (end < inputs.size() && inputs[end].patient_id == inputs[i].patient_id) {
            slices.push_back(batch.outcomes[end].report);
            batch.any_no_lung = batch.any_no_lung || batch.outcomes[end].report.has_flag("no_lung");
            ++end;
        }
        patients.push_back(patient_mean(inputs[i].patient_id, std::move(slices)));
        i = end;
    }
    batch.patients = triage_rank(std::move(patients));
    return batch;
}

inline BatchResult analyze_directory(const std::filesystem::path& root, const AnalysisConfig& cfg) {
    const auto inputs = scan_input(root);
    std::vector<GrayImage> images;
    images.reserve(inputs.size());
    for (const auto& in : inputs) images.push_back(load_image(in.path));
    return analyze_images(inputs, images, cfg);
}

inline nlohmann::ordered_json report_json(const BatchResult& batch, const AnalysisConfig& cfg) {
    nlohmann::ordered_json root;
    root["config"] = config_json(cfg);
    root["patients"] = nlohmann::ordered_json::array();
    std::map<std::string, const SliceOutcome*> by_id;
    for (const auto& o : batch.outcomes) by_id[o.report.slice_id] = &o;
    for (const auto& p : batch.patients) {
        nlohmann::ordered_json pj;
        pj["patient_id"] = p.patient_id;
        pj["rank"] = p.rank;
        pj["mean_infection_rate_percent"] = p.mean_infection_rate_percent;
        pj["slices"] = nlohmann::ordered_json::array();
        for (const auto& s : p.slices) {
            const SliceOutcome* o = by_id.at(s.slice_id);
            nlohmann::ordered_json sj;
            sj["slice_id"] = s.slice_id;
            sj["lung_pixels"] = s.lung_pixels;
            sj["infection_pixels"] = s.infection_pixels;
            sj["infection_rate_percent"] = s.infection_rate_percent;
            sj["thresholds"] = s.thresholds_used.levels();
            sj["objective"] = to_string(s.objective_value.kind);
            sj["objective_value"] = s.objective_value.value;
            sj["flags"] = s.flags;
            if (!s.has_flag("no_lung")) {
                sj["alternative"] = {{"objective", to_string(o->alternative_value.kind)},
                                     {"thresholds", o->alternative_thresholds.levels()},
                                     {"objective_value", o->alternative_value.value}};
            }
            pj["slices"].push_back(std::move(sj));
        }
        root["patients"].push_back(std::move(pj));
    }
    return root;
}

inline void write_overlays(const BatchResult& batch, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
        const auto& o = batch.outcomes[i];
        if (o.report.has_flag("no_lung")) continue;
        const fs::path pdir = dir / batch.inputs[i].patient_id;
        fs::create_directories(pdir);
        const std::string stem = batch.inputs[i].path.stem().string();
        save_image(o.extracted, pdir / (stem + "_infection.pgm"));
        save_image(o.enhanced, pdir / (stem + "_enhanced.pgm"));
        save_mask(o.infection, pdir / (stem + "_infection_mask.pgm"));
        save_mask(o.lung, pdir / (stem + "_lung_mask.pgm"));
    }
}

} // namespace severoscan
