#include "qigl/imaging.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qigl {

namespace fs = std::filesystem;

GrayImage histogram_equalize(const GrayImage& image) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height ||
        image.pixels.empty()) {
        throw ArgumentError("histogram_equalize: malformed image");
    }
    std::uint64_t histogram[256] = {};
    for (std::uint8_t p : image.pixels) ++histogram[p];

    const std::uint64_t total = image.pixels.size();
    std::uint8_t lut[256];
    std::uint64_t cumulative = 0;
    for (int level = 0; level < 256; ++level) {
        cumulative += histogram[level];
        // round_half_up(255 * cumulative / total), exact in integers
        lut[level] = static_cast<std::uint8_t>((510 * cumulative + total) / (2 * total));
    }

    GrayImage out = image;
    for (auto& p : out.pixels) p = lut[p];
    return out;
}

Mat flatten_normalize(const Dataset& dataset) {
    if (dataset.images.empty()) throw DataError("flatten_normalize: empty dataset");
    const Index d = static_cast<Index>(dataset.images.front().size());
    Mat rows(static_cast<Index>(dataset.size()), d);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& img = dataset.images[i];
        if (static_cast<Index>(img.size()) != d) {
            throw ShapeError("flatten_normalize: image dimensions differ");
        }
        for (Index j = 0; j < d; ++j) {
            rows(static_cast<Index>(i), j) = img.pixels[static_cast<std::size_t>(j)] / 255.0;
        }
    }
    return rows;
}

std::uint8_t quantize_unit(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

namespace {

GrayImage render_two_blobs(int size, double dx1, double dy1, double dx2, double dy2,
                           double amp1, double amp2) {
    GrayImage img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size)};
    const double sigma = 0.16 * size;
    const double cx1 = 0.30 * size + dx1, cy1 = 0.30 * size + dy1;
    const double cx2 = 0.70 * size + dx2, cy2 = 0.70 * size + dy2;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double g1 = amp1 * std::exp(-((x - cx1) * (x - cx1) + (y - cy1) * (y - cy1)) /
                                              (2.0 * sigma * sigma));
            const double g2 = amp2 * std::exp(-((x - cx2) * (x - cx2) + (y - cy2) * (y - cy2)) /
                                              (2.0 * sigma * sigma));
            img.pixels[static_cast<std::size_t>(y) * size + x] = quantize_unit(g1 + g2);
        }
    }
    return img;
}

GrayImage render_bars(int size, double phase) {
    GrayImage img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size)};
    const double period = std::max(2.0, size / 2.0);
    for (int y = 0; y < size; ++y) {
        const double v = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (y / period) + phase);
        for (int x = 0; x < size; ++x) {
            img.pixels[static_cast<std::size_t>(y) * size + x] = quantize_unit(v);
        }
    }
    return img;
}

GrayImage render_ramp(int size, double slope_x, double slope_y) {
    GrayImage img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size)};
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double v = 0.5 + slope_x * (x - c) / size + slope_y * (y - c) / size;
            img.pixels[static_cast<std::size_t>(y) * size + x] = quantize_unit(v);
        }
    }
    return img;
}

}  // namespace

Dataset synth_dataset(SynthKind kind, int n, int size, Rng& rng, double jitter) {
    if (n < 2) throw ArgumentError("synthetic dataset needs n >= 2");
    if (size < 2) throw ArgumentError("synthetic image size must be >= 2");
    Dataset dataset;
    dataset.provenance = Provenance::Synthetic;
    dataset.class_label = synth_kind_name(kind);
    dataset.images.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        switch (kind) {
            case SynthKind::TwoBlobs: {
                const double dx1 = jitter * rng.uniform(-1.0, 1.0);
                const double dy1 = jitter * rng.uniform(-1.0, 1.0);
                const double dx2 = jitter * rng.uniform(-1.0, 1.0);
                const double dy2 = jitter * rng.uniform(-1.0, 1.0);
                const double amp1 = 1.0 - 0.3 * jitter * rng.uniform();
                const double amp2 = 1.0 - 0.3 * jitter * rng.uniform();
                dataset.images.push_back(render_two_blobs(size, dx1, dy1, dx2, dy2, amp1, amp2));
                break;
            }
            case SynthKind::Bars: {
                const double phase = jitter * rng.uniform(0.0, 2.0 * std::numbers::pi);
                dataset.images.push_back(render_bars(size, phase));
                break;
            }
            case SynthKind::Ramps: {
                const double sx = jitter * rng.uniform(-1.0, 1.0);
                const double sy = jitter * rng.uniform(-1.0, 1.0);
                dataset.images.push_back(render_ramp(size, sx, sy));
                break;
            }
        }
    }
    return dataset;
}

SynthKind parse_synth_kind(const std::string& name) {
    if (name == "two-blobs" || name == "blobs") return SynthKind::TwoBlobs;
    if (name == "bars") return SynthKind::Bars;
    if (name == "ramps") return SynthKind::Ramps;
    throw ArgumentError("unknown synthetic dataset kind: " + name);
}

std::string synth_kind_name(SynthKind kind) {
    switch (kind) {
        case SynthKind::TwoBlobs: return "two-blobs";
        case SynthKind::Bars: return "bars";
        case SynthKind::Ramps: return "ramps";
    }
    return "two-blobs";
}

// ---------------------------------------------------------------------------
// PGM (binary P5, maxval 255)

namespace {

std::string encode_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istringstream& in) {
    std::string token;
    for (;;) {
        const int c = in.get();
        if (c == EOF) throw IoError("PGM header truncated");
        if (std::isspace(c)) continue;
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        token.push_back(static_cast<char>(c));
        while (in.peek() != EOF && !std::isspace(in.peek())) {
            token.push_back(static_cast<char>(in.get()));
        }
        return token;
    }
}

GrayImage decode_pgm(const std::string& bytes, const std::string& name) {
    std::istringstream in(bytes);
    if (pnm_token(in) != "P5") throw IoError(name + ": not a binary PGM (P5) file");
    GrayImage img;
    try {
        img.width = std::stoi(pnm_token(in));
        img.height = std::stoi(pnm_token(in));
        const int maxval = std::stoi(pnm_token(in));
        if (maxval != 255) throw IoError(name + ": only maxval 255 PGM is supported");
    } catch (const std::invalid_argument&) {
        throw IoError(name + ": malformed PGM header");
    }
    if (img.width < 1 || img.height < 1) throw IoError(name + ": bad PGM dimensions");
    in.get();  // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(img.width) * img.height;
    const auto offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() < offset + need) throw IoError(name + ": PGM payload truncated");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                      bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));
    return img;
}

// ---------------------------------------------------------------------------
// PNG, 8-bit grayscale only

constexpr unsigned char kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    const auto crc = crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

std::string encode_png(const GrayImage& image) {
    std::string ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(image.width));
    put_be32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // grayscale
    ihdr.push_back(0);  // deflate
    ihdr.push_back(0);  // adaptive filtering
    ihdr.push_back(0);  // no interlace

    std::string raw;
    raw.reserve(static_cast<std::size_t>(image.height) * (image.width + 1));
    for (int y = 0; y < image.height; ++y) {
        raw.push_back(0);  // filter type 0 for every scanline
        raw.append(reinterpret_cast<const char*>(image.pixels.data()) +
                       static_cast<std::size_t>(y) * image.width,
                   static_cast<std::size_t>(image.width));
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK) {
        throw IoError("PNG deflate failed");
    }
    compressed.resize(bound);

    std::string out(reinterpret_cast<const char*>(kPngSignature), 8);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", "");
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

GrayImage decode_png(const std::string& bytes, const std::string& name) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0) {
        throw IoError(name + ": not a PNG file");
    }
    GrayImage img;
    std::string idat;
    bool saw_ihdr = false;
    std::size_t at = 8;
    while (at + 8 <= bytes.size()) {
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + at);
        const std::uint32_t len = read_be32(p);
        const std::string type = bytes.substr(at + 4, 4);
        if (at + 12 + len > bytes.size()) throw IoError(name + ": PNG chunk truncated");
        const char* data = bytes.data() + at + 8;
        if (type == "IHDR") {
            if (len != 13) throw IoError(name + ": bad IHDR");
            const auto* d = reinterpret_cast<const unsigned char*>(data);
            img.width = static_cast<int>(read_be32(d));
            img.height = static_cast<int>(read_be32(d + 4));
            const int bit_depth = d[8], color_type = d[9], interlace = d[12];
            if (bit_depth != 8 || color_type != 0 || interlace != 0) {
                throw IoError(name + ": only 8-bit non-interlaced grayscale PNG is supported");
            }
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.append(data, len);
        } else if (type == "IEND") {
            break;
        }
        at += 12 + len;
    }
    if (!saw_ihdr || img.width < 1 || img.height < 1) throw IoError(name + ": missing IHDR");

    const std::size_t stride = static_cast<std::size_t>(img.width) + 1;
    std::string raw(stride * static_cast<std::size_t>(img.height), '\0');
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_len,
                   reinterpret_cast<const Bytef*>(idat.data()),
                   static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size()) {
        throw IoError(name + ": PNG inflate failed");
    }

    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    std::vector<std::uint8_t> prev(static_cast<std::size_t>(img.width), 0);
    for (int y = 0; y < img.height; ++y) {
        const auto* row = reinterpret_cast<const unsigned char*>(raw.data() + stride * y);
        const int filter = row[0];
        auto* out = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        for (int x = 0; x < img.width; ++x) {
            const int value = row[x + 1];
            const int left = x > 0 ? out[x - 1] : 0;
            const int up = prev[static_cast<std::size_t>(x)];
            const int up_left = x > 0 ? prev[static_cast<std::size_t>(x - 1)] : 0;
            int recon = 0;
            switch (filter) {
                case 0: recon = value; break;
                case 1: recon = value + left; break;
                case 2: recon = value + up; break;
                case 3: recon = value + (left + up) / 2; break;
                case 4: recon = value + paeth(left, up, up_left); break;
                default: throw IoError(name + ": unsupported PNG filter type");
            }
            out[x] = static_cast<std::uint8_t>(recon & 0xff);
        }
        std::copy(out, out + img.width, prev.begin());
    }
    return img;
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

// Write-temp-then-rename so a failed save never leaves a partial file.
void write_file_atomic(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed for " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename temp file onto " + path.string());
    }
}

}  // namespace

void save_image(const GrayImage& image, const fs::path& path, ImageFormat format) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height ||
        image.pixels.empty()) {
        throw ArgumentError("save_image: malformed image");
    }
    write_file_atomic(path, format == ImageFormat::Pgm ? encode_pgm(image) : encode_png(image));
}

GrayImage load_image(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    const std::string name = path.filename().string();
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
        return decode_png(bytes, name);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
        return decode_pgm(bytes, name);
    }
    throw IoError(name + ": unsupported image format (need PGM P5 or PNG)");
}

Dataset load_dataset(const fs::path& dir, int expected_width, int expected_height,
                     const std::set<std::string>& exclude) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext != ".pgm" && ext != ".png") continue;
        if (exclude.count(entry.path().filename().string())) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    Dataset dataset;
    dataset.class_label = dir.filename().string();
    std::vector<std::string> errors;
    for (const auto& file : files) {
        try {
            GrayImage img = load_image(file);
            const int want_w = expected_width > 0 ? expected_width : dataset.width();
            const int want_h = expected_height > 0 ? expected_height : dataset.height();
            if (want_w > 0 && (img.width != want_w || img.height != want_h)) {
                errors.push_back(file.filename().string() + ": dimensions " +
                                 std::to_string(img.width) + "x" + std::to_string(img.height) +
                                 " do not match expected " + std::to_string(want_w) + "x" +
                                 std::to_string(want_h));
                continue;
            }
            dataset.images.push_back(std::move(img));
        } catch (const IoError& err) {
            errors.push_back(err.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "dataset load failed for " + std::to_string(errors.size()) + " file(s):";
        for (const auto& e : errors) msg += "\n  " + e;
        throw IoError(msg);
    }
    if (dataset.images.empty()) throw DataError("empty dataset: " + dir.string());
    return dataset;
}

std::set<std::string> read_exclusion_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open exclusion list " + path.string());
    std::set<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        names.insert(line.substr(start));
    }
    return names;
}

}  // namespace qigl
