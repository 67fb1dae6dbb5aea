#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qigl/features.hpp"
#include "qigl/imaging.hpp"
#include "qigl/rng.hpp"

#include <filesystem>
#include <fstream>
#include <map>

using namespace qigl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("qigl_imaging_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

GrayImage random_image(int w, int h, Rng& rng) {
    GrayImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.bounded(256));
    return img;
}

}  // namespace

TEST_CASE("histogram equalization fixtures") {
    GrayImage constant{2, 2, {42, 42, 42, 42}};
    const GrayImage eq = histogram_equalize(constant);
    for (auto p : eq.pixels) CHECK(p == 255);

    GrayImage mostly_dark{2, 2, {0, 0, 0, 255}};
    const GrayImage eq2 = histogram_equalize(mostly_dark);
    CHECK(eq2.pixels == std::vector<std::uint8_t>{191, 191, 191, 255});

    // one pixel per level: T(i) = round(255 * (i + 1) / 256)
    GrayImage uniform{16, 16, std::vector<std::uint8_t>(256)};
    for (int i = 0; i < 256; ++i) uniform.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    const GrayImage eq3 = histogram_equalize(uniform);
    for (int i = 0; i < 256; ++i) {
        const auto want = static_cast<std::uint8_t>((510ULL * (i + 1) + 256) / 512);
        CHECK(eq3.pixels[static_cast<std::size_t>(i)] == want);
    }
    CHECK(eq3.pixels.front() == 1);
    CHECK(eq3.pixels.back() == 255);
    for (int i = 1; i < 256; ++i) CHECK(eq3.pixels[i] >= eq3.pixels[i - 1]);
}

TEST_CASE("histogram equalization properties") {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const GrayImage img = random_image(8, 8, rng);
        const GrayImage once = histogram_equalize(img);
        const GrayImage twice = histogram_equalize(once);

        // idempotent up to one level of rounding drift
        for (std::size_t i = 0; i < img.size(); ++i) {
            CHECK(std::abs(int(twice.pixels[i]) - int(once.pixels[i])) <= 1);
        }

        // rank preservation: p1 <= p2 implies T(p1) <= T(p2)
        std::map<std::uint8_t, std::uint8_t> mapping;
        for (std::size_t i = 0; i < img.size(); ++i) mapping[img.pixels[i]] = once.pixels[i];
        std::uint8_t prev = 0;
        bool first = true;
        for (const auto& [in, out] : mapping) {
            if (!first) CHECK(out >= prev);
            prev = out;
            first = false;
        }
    }
}

TEST_CASE("flatten_normalize") {
    Dataset set;
    GrayImage img{64, 64, std::vector<std::uint8_t>(4096, 0)};
    img.pixels[0] = 255;
    img.pixels[1] = 51;
    set.images.push_back(img);
    set.images.push_back(GrayImage{64, 64, std::vector<std::uint8_t>(4096, 0)});

    const Mat rows = flatten_normalize(set);
    CHECK(rows.rows() == 2);
    CHECK(rows.cols() == 4096);
    CHECK(rows(0, 0) == 1.0);
    CHECK(rows(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rows.row(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rows.minCoeff() >= 0.0);
    CHECK(rows.maxCoeff() <= 1.0);
}

TEST_CASE("PGM save and load") {
    const fs::path dir = temp_dir("pgm");
    Rng rng(5);
    const GrayImage img = random_image(9, 4, rng);
    save_image(img, dir / "a.pgm", ImageFormat::Pgm);
    const GrayImage back = load_image(dir / "a.pgm");
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);

    // exact 15-byte layout for a 2x2 image
    const GrayImage tiny{2, 2, {0, 128, 255, 7}};
    save_image(tiny, dir / "tiny.pgm", ImageFormat::Pgm);
    std::ifstream in(dir / "tiny.pgm", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 15);
    CHECK(bytes.substr(0, 11) == "P5\n2 2\n255\n");
    CHECK(static_cast<unsigned char>(bytes[11]) == 0);
    CHECK(static_cast<unsigned char>(bytes[12]) == 128);
    CHECK(static_cast<unsigned char>(bytes[13]) == 255);
    CHECK(static_cast<unsigned char>(bytes[14]) == 7);

    // invalid path: error, and no partial or temp file appears
    const fs::path missing = dir / "no_such_dir" / "x.pgm";
    CHECK_THROWS_AS(save_image(tiny, missing, ImageFormat::Pgm), IoError);
    CHECK_FALSE(fs::exists(missing));
    CHECK_FALSE(fs::exists(missing.string() + ".tmp"));
}

TEST_CASE("PNG round-trip") {
    const fs::path dir = temp_dir("png");
    Rng rng(9);
    const GrayImage img = random_image(13, 7, rng);
    save_image(img, dir / "a.png", ImageFormat::Png);
    const GrayImage back = load_image(dir / "a.png");
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("load_dataset") {
    const fs::path dir = temp_dir("load");
    CHECK_THROWS_AS(load_dataset(dir), DataError);  // empty

    Rng rng(3);
    save_image(random_image(8, 8, rng), dir / "b.pgm", ImageFormat::Pgm);
    const Dataset one = load_dataset(dir, 8, 8);
    CHECK(one.size() == 1);

    save_image(random_image(4, 4, rng), dir / "c.pgm", ImageFormat::Pgm);
    try {
        load_dataset(dir, 8, 8);
        FAIL("expected a dimension mismatch error");
    } catch (const IoError& err) {
        CHECK(std::string(err.what()).find("c.pgm") != std::string::npos);
    }

    // the offender can be excluded by name
    const Dataset filtered = load_dataset(dir, 8, 8, {"c.pgm"});
    CHECK(filtered.size() == 1);

    std::ofstream list(dir / "exclude.txt");
    list << "# skip the mismatched file\nc.pgm\n";
    list.close();
    const auto names = read_exclusion_list(dir / "exclude.txt");
    CHECK(names == std::set<std::string>{"c.pgm"});
}

TEST_CASE("synthetic datasets") {
    Rng a(42), b(42);
    const Dataset first = synth_dataset(SynthKind::TwoBlobs, 16, 8, a);
    const Dataset second = synth_dataset(SynthKind::TwoBlobs, 16, 8, b);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first.images[i].pixels == second.images[i].pixels);
    }

    Rng c(7);
    const Dataset frozen = synth_dataset(SynthKind::TwoBlobs, 6, 8, c, 0.0);
    for (std::size_t i = 1; i < frozen.size(); ++i) {
        CHECK(frozen.images[i].pixels == frozen.images[0].pixels);
    }

    Rng d(1234);
    const Dataset blobs = synth_dataset(SynthKind::TwoBlobs, 64, 8, d);
    const PcaModel model = fit_pca(flatten_normalize(blobs), 10);
    CHECK(model.explained_variance_ratio.sum() >= 0.90);

    Rng e(5);
    const Dataset bars = synth_dataset(SynthKind::Bars, 8, 16, e);
    CHECK(bars.size() == 8);
    const Dataset ramps = synth_dataset(SynthKind::Ramps, 8, 16, e);
    CHECK(ramps.size() == 8);

    CHECK_THROWS_AS(synth_dataset(SynthKind::Bars, 1, 8, e), ArgumentError);
}
