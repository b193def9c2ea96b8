#include "nrcid/errors.hpp"
#include "nrcid/mlp.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

// Layout (all integers u64 and all reals f64, little-endian):
//   magic "NRCIDMLP" | u32 version | u32 flags (0)
//   input_dim | hidden_layers | hidden_width | target_dim | seed
//   hidden[0].W (out x in, row-major) | hidden[0].b | ... | head.W | head.b

namespace nrcid {
namespace {

constexpr std::array<char, 8> kMagic = {'N', 'R', 'C', 'I', 'D', 'M', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    const std::vector<unsigned char>& bytes() const { return bytes_; }

private:
    std::vector<unsigned char> bytes_;
};

class Reader {
public:
    explicit Reader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}
    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        }
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw DataError("checkpoint is truncated");
        }
    }
    std::vector<unsigned char> bytes_;
    std::size_t pos_ = 0;
};

void write_layer(Writer& w, const DenseLayer& l) {
    for (double v : l.weights.values()) {
        w.f64(v);
    }
    for (double v : l.bias) {
        w.f64(v);
    }
}

DenseLayer read_layer(Reader& r, std::size_t out, std::size_t in) {
    DenseLayer l{Matrix(out, in), std::vector<double>(out)};
    for (double& v : l.weights.values()) {
        v = r.f64();
    }
    for (double& v : l.bias) {
        v = r.f64();
    }
    return l;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".txt");
}

} // namespace

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
    const MlpConfig& c = model.config;
    Writer w;
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u32(0);
    w.u64(c.input_dim);
    w.u64(c.hidden_layers);
    w.u64(c.hidden_width);
    w.u64(c.target_dim);
    w.u64(c.seed);
    for (const auto& l : model.hidden) {
        write_layer(w, l);
    }
    write_layer(w, model.head);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open checkpoint for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) {
        throw DataError("failed writing checkpoint: " + path.string());
    }

    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) {
        throw DataError("cannot open checkpoint sidecar for writing");
    }
    side << "format: NRCIDMLP v" << kVersion << "\n"
         << "input_dim: " << c.input_dim << "\n"
         << "hidden_layers: " << c.hidden_layers << "\n"
         << "hidden_width: " << c.hidden_width << "\n"
         << "target_dim: " << c.target_dim << "\n"
         << "seed: " << c.seed << "\n"
         << "init: " << kInitScheme << '\n'
         << "parameters: " << model.parameter_count() << "\n";
    std::size_t fan_in = c.input_dim;
    for (std::size_t l = 0; l < model.hidden.size(); ++l) {
        side << "hidden" << (l + 1) << ".weights: " << c.hidden_width << "x" << fan_in << "\n"
             << "hidden" << (l + 1) << ".bias: " << c.hidden_width << "\n";
        fan_in = c.hidden_width;
    }
    side << "head.weights: " << c.target_dim << "x" << c.hidden_width << "\n"
         << "head.bias: " << c.target_dim << "\n";
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint: " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(bytes));

    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kMagic) {
        throw DataError("not an MLP checkpoint (bad magic): " + path.string());
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    r.u32();

    MlpModel m;
    m.config.input_dim = r.u64();
    m.config.hidden_layers = r.u64();
    m.config.hidden_width = r.u64();
    m.config.target_dim = r.u64();
    m.config.seed = r.u64();
    try {
        m.config.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("corrupt checkpoint config: ") + e.what());
    }
    const MlpConfig& c = m.config;
    constexpr std::uint64_t kDimLimit = std::uint64_t{1} << 24;
    if (c.input_dim > kDimLimit || c.hidden_layers > kDimLimit || c.hidden_width > kDimLimit ||
        c.target_dim > kDimLimit) {
        throw DataError("corrupt checkpoint config: implausible dimensions");
    }
    const std::uint64_t expected = c.hidden_width * (c.input_dim + 1) +
                                   (c.hidden_layers - 1) * c.hidden_width * (c.hidden_width + 1) +
                                   c.target_dim * (c.hidden_width + 1);
    if (expected * 8 != r.remaining()) {
        throw DataError("checkpoint size does not match its config");
    }
    std::size_t fan_in = m.config.input_dim;
    for (std::size_t l = 0; l < m.config.hidden_layers; ++l) {
        m.hidden.push_back(read_layer(r, m.config.hidden_width, fan_in));
        fan_in = m.config.hidden_width;
    }
    m.head = read_layer(r, m.config.target_dim, m.config.hidden_width);
    if (!r.at_end()) {
        throw DataError("checkpoint has trailing bytes");
    }
    return m;
}

} // namespace nrcid
