#pragma once

#include "qigl/checkpoint.hpp"
#include "qigl/config.hpp"
#include "qigl/evaluation.hpp"
#include "qigl/imaging.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qigl {

/// Entry point behind main(). Exit codes: 0 success, 1 usage or config
/// error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args);

// The subcommand bodies, callable directly from tests.

struct PreprocessOptions {
    std::filesystem::path input;
    std::filesystem::path out;
    bool he = false;
    std::filesystem::path exclude;  // optional
};
void cmd_preprocess(const PreprocessOptions& options);

struct TrainOptions {
    RunConfig config;
    bool resume = false;
};
void cmd_train(const TrainOptions& options);

struct GenerateOptions {
    std::filesystem::path checkpoint;
    int count = 0;
    std::filesystem::path out;
    ImageFormat format = ImageFormat::Pgm;
    std::optional<std::uint64_t> seed;  // defaults to the checkpoint's seed
};
void cmd_generate(const GenerateOptions& options);

struct EvaluateOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path dataset;  // optional; defaults to the embedded config's source
    int n_samples = 256;
    std::optional<std::uint64_t> seed;
    std::string space = "feature";  // feature | pixel
    bool per_class = false;
    std::filesystem::path out;      // optional; directory for metrics.json
};
MetricsReport cmd_evaluate(const EvaluateOptions& options);

struct AblateOptions {
    RunConfig config;
};
void cmd_ablate(const AblateOptions& options);

// Shared pipeline pieces (also used by the acceptance suite).

/// Dataset from the config's directory or synthetic spec, histogram
/// equalized when config.he is set. Synthetic data derives from the seed.
Dataset resolve_dataset(const RunConfig& config);

struct FeaturePipeline {
    Dataset dataset;
    PcaModel pca;
    Mat scaled_scores;  // n x feature_count, in [0, 1] on the training set
};
FeaturePipeline build_feature_pipeline(const RunConfig& config);

/// Path of the per-epoch checkpoint file inside an output directory.
std::filesystem::path checkpoint_path(const std::filesystem::path& out, int epoch);

std::string metrics_note();

}  // namespace qigl
