#pragma once

#include "qigl/common.hpp"
#include "qigl/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace qigl {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, length width * height

    std::size_t size() const { return pixels.size(); }
};

enum class Provenance { Loaded, Synthetic };

struct Dataset {
    std::vector<GrayImage> images;  // uniform dimensions
    std::string class_label;
    Provenance provenance = Provenance::Loaded;

    int width() const { return images.empty() ? 0 : images.front().width; }
    int height() const { return images.empty() ? 0 : images.front().height; }
    std::size_t size() const { return images.size(); }
};

/// Maps each pixel through T(i) = round_half_up(255 * cdf(i)) where cdf is
/// the image's cumulative normalized histogram. Computed in exact integer
/// arithmetic so outputs are bit-stable.
GrayImage histogram_equalize(const GrayImage& image);

/// n x (width*height) matrix of pixels / 255, row-major per image.
Mat flatten_normalize(const Dataset& dataset);

enum class SynthKind { TwoBlobs, Bars, Ramps };

/// Deterministic-under-seed synthetic grayscale images. `jitter` scales the
/// per-image randomness; zero makes every image identical.
Dataset synth_dataset(SynthKind kind, int n, int size, Rng& rng, double jitter = 1.0);

SynthKind parse_synth_kind(const std::string& name);
std::string synth_kind_name(SynthKind kind);

enum class ImageFormat { Pgm, Png };

/// Clamp to [0, 1] and round half-up to an 8-bit level; the rule used for
/// every pixel emitted by the toolkit.
std::uint8_t quantize_unit(double v);

// PGM output is binary P5 with the exact layout "P5\n<w> <h>\n255\n" followed
// by the raw row-major payload. PNG output is 8-bit grayscale,
// non-interlaced, one zlib stream with filter 0 on every row.
void save_image(const GrayImage& image, const std::filesystem::path& path, ImageFormat format);

/// Format picked from the file contents (P5 header or PNG signature).
GrayImage load_image(const std::filesystem::path& path);

/// Loads every .pgm/.png file in `dir` (non-recursive, filename-sorted),
/// skipping names in `exclude`. If expected dimensions are given (> 0),
/// any mismatching file fails the load with its name in the message.
Dataset load_dataset(const std::filesystem::path& dir, int expected_width = -1,
                     int expected_height = -1, const std::set<std::string>& exclude = {});

/// One filename per line, UTF-8; '#' lines and blanks ignored.
std::set<std::string> read_exclusion_list(const std::filesystem::path& path);

}  // namespace qigl
