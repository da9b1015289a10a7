// severoscan: batch infection-rate analysis of 2D lung CT slices.
//
//   severoscan analyze --input DIR --output report.json [--overlay DIR] ...
//   severoscan phantom --output DIR [--patients N] [--slices M] [--seed S]
//   severoscan --print-config | --version

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "severoscan/phantom.hpp"
#include "severoscan/pgm.hpp"
#include "severoscan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace severoscan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNoLung = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SEVEROSCAN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring non-numeric SEVEROSCAN_SEED\n";
        }
    }
    return 42;
}

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write report: " + path.string());
}

int run_analyze(const AnalysisConfig& cfg, const std::string& input, const std::string& output,
                const std::string& overlay) {
    if (input.empty() || output.empty()) {
        std::cerr << "analyze: --input and --output are required\n";
        return kExitInvalidInput;
    }
    BatchResult batch;
    const auto start = std::chrono::steady_clock::now();
    try {
        batch = analyze_directory(input, cfg);
    } catch (const FormatError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_json(report_json(batch, cfg), output);
    if (!overlay.empty()) write_overlays(batch, overlay);

    for (const auto& p : batch.patients) {
        std::cout << p.rank << ". " << p.patient_id << "  mean " << format_percent(p.mean_infection_rate_percent)
                  << "  (" << p.slices.size() << " slices)\n";
        for (const auto& s : p.slices) {
            std::cout << "     " << s.slice_id << "  ";
            if (s.has_flag("no_lung"))
                std::cout << "no lung detected\n";
            else
                std::cout << s.infection_pixels << "/" << s.lung_pixels << " = "
                          << format_percent(s.infection_rate_percent) << '\n';
        }
    }
    std::cout << "analyzed " << batch.inputs.size() << " slices in " << seconds << " s\n";
    if (batch.any_no_lung) {
        std::cerr << "warning: no lung detected in at least one slice\n";
        return kExitNoLung;
    }
    return kExitOk;
}

int run_phantom(const std::string& output, int patients, int slices, std::uint64_t seed, int size,
                bool transposed) {
    if (output.empty()) {
        std::cerr << "phantom: --output is required\n";
        return kExitInvalidInput;
    }
    const fs::path root(output);
    nlohmann::ordered_json truth;
    truth["seed"] = seed;
    truth["size"] = size;
    truth["transposed"] = transposed;
    truth["patients"] = nlohmann::ordered_json::array();
    for (int p = 0; p < patients; ++p) {
        char pid[32];
        std::snprintf(pid, sizeof pid, "patient%02d", p + 1);
        const auto specs = phantom::patient_series(seed ^ fnv1a64(pid), phantom::graded_profile(p), slices, size, size);
        fs::create_directories(root / "slices" / pid);
        fs::create_directories(root / "truth" / pid);
        nlohmann::ordered_json pj;
        pj["patient_id"] = pid;
        pj["slices"] = nlohmann::ordered_json::array();
        double sum = 0.0;
        for (int s = 0; s < slices; ++s) {
            char sid[32];
            std::snprintf(sid, sizeof sid, "slice%02d", s + 1);
            auto t = phantom::generate(specs[static_cast<std::size_t>(s)]);
            if (transposed) {
                t.image = transpose(t.image);
                t.body_mask = transpose(t.body_mask);
                t.lung_mask = transpose(t.lung_mask);
                t.infection_mask = transpose(t.infection_mask);
            }
            save_image(t.image, root / "slices" / pid / (std::string(sid) + ".pgm"));
            save_mask(t.body_mask, root / "truth" / pid / (std::string(sid) + "_body.pgm"));
            save_mask(t.lung_mask, root / "truth" / pid / (std::string(sid) + "_lung.pgm"));
            save_mask(t.infection_mask, root / "truth" / pid / (std::string(sid) + "_infection.pgm"));
            pj["slices"].push_back({{"slice_id", std::string(pid) + "/" + sid},
                                    {"lung_pixels", popcount(t.lung_mask)},
                                    {"infection_pixels", popcount(t.infection_mask)},
                                    {"true_infection_rate_percent", t.true_infection_rate_percent}});
            sum += t.true_infection_rate_percent;
        }
        pj["true_mean_infection_rate_percent"] = sum / slices;
        truth["patients"].push_back(std::move(pj));
    }
    write_json(truth, root / "truth.json");
    std::cout << "wrote " << patients << " x " << slices << " phantom slices to " << (root / "slices") << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infection-rate analysis of 2D lung CT slices"};
    app.require_subcommand(0, 1);

    bool print_config = false;
    bool version = false;
    app.add_flag("--print-config", print_config, "Print the fully resolved default configuration");
    app.add_flag("--version", version, "Print the tool version");

    AnalysisConfig cfg;
    cfg.hso.seed = default_seed();
    std::string input, output, overlay, objective = "otsu";
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze input/<patient_id>/<slice>.pgm");
    analyze->add_option("--input", input, "Input directory, one subdirectory per patient");
    analyze->add_option("--output", output, "Report JSON path");
    analyze->add_option("--overlay", overlay, "Write extracted-infection overlays to this directory");
    analyze->add_option("--objective", objective, "Thresholding objective")->check(CLI::IsMember({"otsu", "kapur"}));
    analyze->add_option("--thresholds", cfg.hso.k, "Number of thresholds k")->check(CLI::Range(1, kMaxThresholds));
    analyze->add_option("--artifact-threshold", cfg.filter.artifact_threshold, "Bone/artifact cut")
        ->check(CLI::Range(1, 255));
    analyze->add_option("--hms", cfg.hso.hms, "Harmony memory size")->check(CLI::Range(2, 100000));
    analyze->add_option("--hmcr", cfg.hso.hmcr, "Memory considering rate")->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--par", cfg.hso.par, "Pitch adjusting rate")->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--bw", cfg.hso.bw, "Pitch bandwidth")->check(CLI::Range(1, 253));
    analyze->add_option("--iters", cfg.hso.max_improvisations, "Improvisation budget")->check(CLI::PositiveNumber);
    analyze->add_option("--seed", cfg.hso.seed, "RNG seed (fallback: SEVEROSCAN_SEED, then 42)");
    analyze->add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)");
    bool analyze_print = false;
    analyze->add_flag("--print-config", analyze_print, "Print the resolved configuration and exit");

    std::string phantom_out;
    int patients = 1, slices = 10, size = 512;
    std::uint64_t phantom_seed = 7;
    bool transposed = false;
    CLI::App* phantom_cmd = app.add_subcommand("phantom", "Write synthetic slices with ground truth");
    phantom_cmd->add_option("--output", phantom_out, "Output directory");
    phantom_cmd->add_option("--patients", patients, "Number of patients")->check(CLI::Range(1, 99));
    phantom_cmd->add_option("--slices", slices, "Slices per patient")->check(CLI::Range(1, 99));
    phantom_cmd->add_option("--seed", phantom_seed, "Generator seed");
    phantom_cmd->add_option("--size", size, "Slice width and height")->check(CLI::Range(64, 4096));
    phantom_cmd->add_flag("--transpose", transposed, "Transpose every slice and mask");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitInvalidInput;
    }

    try {
        cfg.objective = parse_objective(objective);
        if (version) {
            std::cout << "severoscan " << kVersion << '\n';
            return kExitOk;
        }
        if (print_config || analyze_print) {
            cfg.validate();
            std::cout << config_json(cfg).dump(2) << '\n';
            return kExitOk;
        }
        if (*analyze) return run_analyze(cfg, input, output, overlay);
        if (*phantom_cmd) return run_phantom(phantom_out, patients, slices, phantom_seed, size, transposed);
        std::cerr << app.help();
        return kExitInvalidInput;
    } catch (const FormatError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
