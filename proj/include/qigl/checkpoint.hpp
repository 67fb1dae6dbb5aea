#pragma once

#include "qigl/critic.hpp"
#include "qigl/features.hpp"
#include "qigl/qgenerator.hpp"
#include "qigl/training.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace qigl {

// Single binary container for exact resume. Layout (all integers and
// doubles little-endian, arrays prefixed by a u64 element count):
//
//   magic "QIGLCKPT" | u32 version | u32 reserved
//   u64 config byte count, config text (canonical form)
//   u32 epoch (completed epochs)
//   u32 image width, u32 image height
//   u8 critic head (0 linear / 1 sigmoid), u8 assignment (0 conv / 1 bal)
//   u32 n_subgens, u32 depth, u32 n_qubits
//   per sub-generator: f64 array, row-major (layer, qubit)
//   u32 critic in/h1/h2, then f64 arrays w1 b1 w2 b2 w3 b3 (matrices row-major)
//   u64 pca k, u64 pca d, f64 arrays mean, axes (row-major), singular values,
//     explained variance ratios, then f64 pca_min, pca_max
//   u64 generator Adam step, f64 arrays m, v
//   u64 critic Adam step, six f64 m arrays, six f64 v arrays
//   u64 array of 4 rng state words
//   u64 history row count, rows of (u32 epoch, f64 critic loss,
//     f64 generator loss, f64 frechet, f64 wall seconds)
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::string config_text;
    int epoch = 0;
    int image_width = 0;
    int image_height = 0;
    GeneratorEnsemble ensemble;
    CriticParams critic;
    PcaModel pca;
    AdamState gen_opt;
    AdamState critic_opt;
    std::array<std::uint64_t, 4> rng_state{};
    std::vector<EpochRecord> history;
};

/// Atomic (write-temp-then-rename); a failed save leaves no partial file.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Rejects wrong magic and versions other than kVersion.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qigl
