#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdnet/analysis.hpp"
#include "fdnet/datagen.hpp"
#include "fdnet/train.hpp"

namespace fdnet {

inline constexpr const char* kVersion = "0.1.0";

// One regression study: target, band, model roster and the training
// hyperparameters at paper scale. Desk runs divide the iteration counts.
struct PresetConfig {
    std::string name;
    int m = 64;
    double delta = 2e-4;
    std::vector<std::string> models;

    // joint SGD (inverse-decay schedule)
    double alpha0 = 2e-3;
    double gamma = 0.95;
    double m0 = 5e4;
    long batch = 201;
    long joint_iters = 400000;

    // layer-wise run (star_diag0)
    double eta = 0.01;
    double lambda = 0.1;
    long t1 = 20000;
    long t2 = 240000;
    long lw_batch = 256;
    double r_c = 0.5;
    double phase2_eta_prime = 50.0;
    bool phase2_rule = true;  // false: constant step phase2_eta_prime

    std::string csv_path;     // set for the semi-synthetic preset
    double csv_noise = 0.0;
};

PresetConfig preset_config(const std::string& name, const std::string& data_dir);
std::vector<std::string> preset_names();

struct ModelRunResult {
    std::string model;
    std::uint64_t seed = 0;
    double final_rel_l2 = 0.0;
    double final_loss = 0.0;
    TrainingTrace trace;
    std::vector<double> predictions;
    // |w| (or dense column norms) per embedding slot, for the mode plots
    std::vector<double> mode_weight;
    std::vector<int> mode_index;
    std::optional<DiagNetParams> diag_params;  // layer-wise runs only
};

struct PresetOptions {
    std::string preset = "ex1";
    std::uint64_t seed = 1;
    double scale = 10.0;  // iteration divisor relative to paper scale
    int workers = 2;
    std::string out_dir;   // empty: keep results in memory only
    std::string data_dir = "data";
    int m_override = 0;    // 0: preset default
    std::vector<std::string> models_override;  // empty: preset roster
};

struct PresetOutcome {
    PresetConfig config;
    Dataset dataset;
    double snr = 0.0;  // NaN when undefined
    std::vector<ModelRunResult> models;
    std::vector<std::string> files;
};

// Builds the dataset, runs every model in the roster (fanning out over
// `workers` threads) and, when out_dir is set, writes the CSV outputs and the
// run manifest.
PresetOutcome run_preset(const PresetOptions& opt);

// Flat key=value config text; '#' starts a comment.
std::map<std::string, std::string> read_kv_config(const std::string& path);

// Atomic JSON manifest write (temp file + rename).
void write_manifest(const std::string& dir, const std::string& json_text);

std::string manifest_json(const PresetOptions& opt, const PresetOutcome& out);

}  // namespace fdnet
