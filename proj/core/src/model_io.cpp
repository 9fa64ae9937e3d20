#include "neurosym/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "neurosym/error.hpp"

namespace neurosym {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'S', 'Y', 'M'};

template <typename U>
void put(std::ostream& out, U v) {
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw ParseError("model file truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
}

std::unique_ptr<Predictor> rebuild(ModelKind kind, const std::vector<std::uint64_t>& dims) {
    switch (kind) {
        case ModelKind::Linear:
            if (dims.size() != 2) throw ParseError("linear model dimension table must have 2 entries");
            return std::make_unique<LinearPredictor>(dims[0], dims[1], 0);
        case ModelKind::Pooled:
            return std::make_unique<PooledPredictor>(PooledPredictor::config_from_dimensions(dims));
        case ModelKind::Attention:
            return std::make_unique<AttentionPredictor>(AttentionPredictor::config_from_dimensions(dims));
    }
    throw ParseError("unknown model kind");
}

}  // namespace

void save_model(const Predictor& model, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kModelFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.kind()));
    put<std::uint32_t>(out, 0);
    const auto dims = model.dimension_table();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put<std::uint64_t>(out, d);
    const auto& params = model.parameters();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.block_count()));
    for (const auto& b : params.blocks()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
        out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(b.rows));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(b.cols));
    }
    for (double v : params.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw IoError("failed to write model");
}

void save_model_file(const Predictor& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_model(model, out);
    out.flush();
    if (!out) throw IoError("failed to write '" + path + "'");
}

std::unique_ptr<Predictor> load_model(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("not a model file (bad magic)");
    const auto version = get<std::uint32_t>(in);
    if (version != kModelFormatVersion) {
        throw ParseError("unsupported model format version " + std::to_string(version));
    }
    const auto kind = get<std::uint32_t>(in);
    if (kind > static_cast<std::uint32_t>(ModelKind::Attention)) throw ParseError("unknown model kind");
    get<std::uint32_t>(in);
    const auto n_dims = get<std::uint32_t>(in);
    if (n_dims > 64) throw ParseError("dimension table too large");
    std::vector<std::uint64_t> dims(n_dims);
    for (auto& d : dims) d = get<std::uint64_t>(in);
    for (std::size_t i = 0; i < dims.size() && i < 6; ++i) {
        if (dims[i] > (1u << 20)) throw ParseError("dimension table entry out of range");
    }

    std::unique_ptr<Predictor> model;
    try {
        model = rebuild(static_cast<ModelKind>(kind), dims);
    } catch (const InvalidConfigError& e) {
        throw ParseError(std::string("invalid model dimensions: ") + e.what());
    }
    auto& params = model->parameters();
    const auto n_blocks = get<std::uint32_t>(in);
    if (n_blocks != params.block_count()) throw ParseError("block count does not match architecture");
    for (const auto& b : params.blocks()) {
        const auto len = get<std::uint32_t>(in);
        if (len > 4096) throw ParseError("block name too long");
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw ParseError("model file truncated");
        const auto rows = get<std::uint64_t>(in);
        const auto cols = get<std::uint64_t>(in);
        if (name != b.name || rows != static_cast<std::uint64_t>(b.rows) || cols != static_cast<std::uint64_t>(b.cols)) {
            throw ParseError("block '" + name + "' does not match architecture block '" + b.name + "'");
        }
    }
    for (double& v : params.values()) v = std::bit_cast<double>(get<std::uint64_t>(in));
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after parameters");
    if (!params.all_finite()) throw ParseError("model contains non-finite parameters");
    return model;
}

std::unique_ptr<Predictor> load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model '" + path + "'");
    return load_model(in);
}

}  // namespace neurosym
