#pragma once

#include "qigl/common.hpp"
#include "qigl/features.hpp"
#include "qigl/training.hpp"

#include <filesystem>
#include <string>

namespace qigl {

// Everything a run needs, parsed from line-oriented "key = value" text.
// Unknown keys and out-of-range values are rejected with line diagnostics
// before any work starts.
struct RunConfig {
    // data source: either a dataset directory or a synthetic spec
    std::string dataset;           // directory of .pgm/.png files; empty -> synthetic
    std::string synth_kind = "two-blobs";
    int synth_n = 64;
    int synth_size = 8;
    double synth_jitter = 1.0;
    std::string exclude;           // optional exclusion-list file

    std::string out = "runs/out";
    int checkpoint_every = 1;      // epochs between checkpoint writes
    int emit_images = 0;           // images written after the final epoch

    // model shape
    int sub_generators = 8;
    int qubits = 5;
    int layers = 6;
    int pca_components = 40;
    double variance_eta = 0.98;

    // training
    int epochs = 50;
    int batch_size = 8;
    double lr_generator = 0.3;
    double lr_critic = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip_c = 0.01;
    int critic_steps = 5;
    std::string loss = "wasserstein";        // wasserstein | bce
    std::string assignment = "balanced";     // balanced | conventional
    bool he = false;
    std::uint64_t seed = 42;

    // evaluation / logging
    int eval_samples = 256;
    bool log_timing = true;  // when false the CSV wall_seconds column is 0

    TrainConfig train_config() const;
    LossMode loss_mode() const;
    AssignmentMode assignment_mode() const;
    int feature_count() const { return sub_generators * qubits; }

    void validate() const;
};

/// Parses and validates; errors carry "line N: ..." diagnostics.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Fixed key order and shortest-round-trip numbers, so equal configs hash
/// equally no matter how they were written.
std::string canonical_config_text(const RunConfig& config);

std::string config_hash(const RunConfig& config);

}  // namespace qigl
