#include "qigl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace qigl {

namespace {

constexpr char kMagic[8] = {'Q', 'I', 'G', 'L', 'C', 'K', 'P', 'T'};

class ByteWriter {
  public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const void* data, std::size_t n) {
        bytes_.append(static_cast<const char*>(data), n);
    }
    void f64_array(const double* data, std::size_t n) {
        u64(n);
        for (std::size_t i = 0; i < n; ++i) f64(data[i]);
    }
    void vec(const Vec& v) { f64_array(v.data(), static_cast<std::size_t>(v.size())); }
    void mat_rowmajor(const Mat& m) {
        u64(static_cast<std::uint64_t>(m.size()));
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
        }
    }
    const std::string& bytes() const { return bytes_; }

  private:
    std::string bytes_;
};

class ByteReader {
  public:
    explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const char* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t n) { return std::string(take(n), n); }
    Vec vec() {
        const std::uint64_t n = u64();
        Vec v(static_cast<Index>(n));
        for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Index>(i)] = f64();
        return v;
    }
    Mat mat_rowmajor(Index rows, Index cols) {
        const std::uint64_t n = u64();
        if (n != static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols)) {
            throw IoError("checkpoint: array length does not match declared shape");
        }
        Mat m(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) m(r, c) = f64();
        }
        return m;
    }

  private:
    const char* take(std::size_t n) {
        if (at_ + n > bytes_.size()) throw IoError("checkpoint truncated");
        const char* p = bytes_.data() + at_;
        at_ += n;
        return p;
    }

    std::string bytes_;
    std::size_t at_ = 0;
};

void write_adam(ByteWriter& w, const AdamState& state) {
    w.u64(static_cast<std::uint64_t>(state.step));
    w.u64(state.m.size());
    for (const auto& m : state.m) w.vec(m);
    for (const auto& v : state.v) w.vec(v);
}

AdamState read_adam(ByteReader& r) {
    AdamState state;
    state.step = static_cast<long>(r.u64());
    const std::uint64_t tensors = r.u64();
    state.m.reserve(tensors);
    state.v.reserve(tensors);
    for (std::uint64_t i = 0; i < tensors; ++i) state.m.push_back(r.vec());
    for (std::uint64_t i = 0; i < tensors; ++i) state.v.push_back(r.vec());
    return state;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("checkpoint write failed for " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename checkpoint onto " + path.string());
    }
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    ByteWriter w;
    w.raw(kMagic, sizeof(kMagic));
    w.u32(Checkpoint::kVersion);
    w.u32(0);

    w.u64(checkpoint.config_text.size());
    w.raw(checkpoint.config_text.data(), checkpoint.config_text.size());
    w.u32(static_cast<std::uint32_t>(checkpoint.epoch));
    w.u32(static_cast<std::uint32_t>(checkpoint.image_width));
    w.u32(static_cast<std::uint32_t>(checkpoint.image_height));

    w.u8(checkpoint.critic.head == CriticHead::Sigmoid ? 1 : 0);
    w.u8(checkpoint.ensemble.assignment.mode == AssignmentMode::Balanced ? 1 : 0);

    const auto& ensemble = checkpoint.ensemble;
    w.u32(static_cast<std::uint32_t>(ensemble.n_subgens()));
    w.u32(static_cast<std::uint32_t>(ensemble.circuit.depth));
    w.u32(static_cast<std::uint32_t>(ensemble.circuit.n_qubits));
    for (const auto& sub : ensemble.sub_generators) w.mat_rowmajor(sub.weights);

    const auto& critic = checkpoint.critic;
    w.u32(static_cast<std::uint32_t>(critic.w1.cols()));
    w.u32(static_cast<std::uint32_t>(critic.w1.rows()));
    w.u32(static_cast<std::uint32_t>(critic.w2.rows()));
    w.mat_rowmajor(critic.w1);
    w.vec(critic.b1);
    w.mat_rowmajor(critic.w2);
    w.vec(critic.b2);
    w.mat_rowmajor(critic.w3);
    w.vec(critic.b3);

    const auto& pca = checkpoint.pca;
    w.u64(static_cast<std::uint64_t>(pca.components()));
    w.u64(static_cast<std::uint64_t>(pca.dim()));
    w.vec(pca.mean);
    w.mat_rowmajor(pca.axes);
    w.vec(pca.singular_values);
    w.vec(pca.explained_variance_ratio);
    w.f64(pca.pca_min);
    w.f64(pca.pca_max);

    write_adam(w, checkpoint.gen_opt);
    write_adam(w, checkpoint.critic_opt);

    w.u64(4);
    for (std::uint64_t word : checkpoint.rng_state) w.u64(word);

    w.u64(checkpoint.history.size());
    for (const auto& rec : checkpoint.history) {
        w.u32(static_cast<std::uint32_t>(rec.epoch));
        w.f64(rec.critic_loss);
        w.f64(rec.generator_loss);
        w.f64(rec.frechet);
        w.f64(rec.wall_seconds);
    }

    write_file_atomic(path, w.bytes());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(std::move(bytes));

    if (r.str(8) != std::string(kMagic, sizeof(kMagic))) {
        throw IoError(path.string() + ": not a checkpoint file");
    }
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion) {
        throw IoError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));
    }
    r.u32();  // reserved

    Checkpoint c;
    const std::uint64_t config_len = r.u64();
    c.config_text = r.str(config_len);
    c.epoch = static_cast<int>(r.u32());
    c.image_width = static_cast<int>(r.u32());
    c.image_height = static_cast<int>(r.u32());

    const bool sigmoid_head = r.u8() == 1;
    const AssignmentMode mode = r.u8() == 1 ? AssignmentMode::Balanced
                                            : AssignmentMode::Conventional;

    const int n_subgens = static_cast<int>(r.u32());
    const int depth = static_cast<int>(r.u32());
    const int n_qubits = static_cast<int>(r.u32());
    c.ensemble = GeneratorEnsemble::make(n_subgens, n_qubits, depth, mode);
    for (auto& sub : c.ensemble.sub_generators) sub.weights = r.mat_rowmajor(depth, n_qubits);

    const int in_dim = static_cast<int>(r.u32());
    const int h1 = static_cast<int>(r.u32());
    const int h2 = static_cast<int>(r.u32());
    c.critic = CriticParams::zeros(in_dim, h1, h2);
    c.critic.head = sigmoid_head ? CriticHead::Sigmoid : CriticHead::Linear;
    c.critic.w1 = r.mat_rowmajor(h1, in_dim);
    c.critic.b1 = r.vec();
    c.critic.w2 = r.mat_rowmajor(h2, h1);
    c.critic.b2 = r.vec();
    c.critic.w3 = r.mat_rowmajor(1, h2);
    c.critic.b3 = r.vec();

    const auto k = static_cast<Index>(r.u64());
    const auto d = static_cast<Index>(r.u64());
    c.pca.mean = r.vec();
    c.pca.axes = r.mat_rowmajor(k, d);
    c.pca.singular_values = r.vec();
    c.pca.explained_variance_ratio = r.vec();
    c.pca.pca_min = r.f64();
    c.pca.pca_max = r.f64();

    c.gen_opt = read_adam(r);
    c.critic_opt = read_adam(r);

    if (r.u64() != 4) throw IoError("checkpoint: bad rng state length");
    for (auto& word : c.rng_state) word = r.u64();

    const std::uint64_t history_rows = r.u64();
    c.history.reserve(history_rows);
    for (std::uint64_t i = 0; i < history_rows; ++i) {
        EpochRecord rec;
        rec.epoch = static_cast<int>(r.u32());
        rec.critic_loss = r.f64();
        rec.generator_loss = r.f64();
        rec.frechet = r.f64();
        rec.wall_seconds = r.f64();
        c.history.push_back(rec);
    }
    return c;
}

}  // namespace qigl
