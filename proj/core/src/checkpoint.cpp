#include "frame/checkpoint.hpp"

#include <fstream>

#include "frame/io.hpp"

namespace frame {

namespace {
constexpr char kMagic[8] = {'F', 'R', 'A', 'M', 'E', 'c', 'k', 'p'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const std::string& config_text, int scalar_width) {
    if (scalar_width != 4 && scalar_width != 8) {
        throw ConfigError("checkpoint scalar width must be 4 or 8, got " +
                          std::to_string(scalar_width));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());

    io::write_bytes(os, kMagic, sizeof(kMagic));
    io::write_u32(os, kVersion);
    io::write_u8(os, static_cast<std::uint8_t>(scalar_width));
    io::write_string(os, config_text);
    io::write_u64(os, params.size());

    for (const auto& [name, t] : params.raw()) {
        io::write_string(os, name);
        io::write_u32(os, static_cast<std::uint32_t>(t.shape().size()));
        for (auto d : t.shape()) io::write_u64(os, static_cast<std::uint64_t>(d));
        for (double v : t.values()) {
            if (scalar_width == 8) {
                io::write_f64(os, v);
            } else {
                io::write_f32(os, static_cast<float>(v));
            }
        }
    }
    os.flush();
    if (!os) throw DataError("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());

    char magic[8];
    io::read_bytes(is, magic, sizeof(magic));
    if (std::string(magic, 8) != std::string(kMagic, 8)) {
        throw DataError("not a checkpoint file: " + path.string());
    }
    const std::uint32_t version = io::read_u32(is);
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const int scalar_width = io::read_u8(is);
    if (scalar_width != 4 && scalar_width != 8) {
        throw DataError("corrupt checkpoint: scalar width " + std::to_string(scalar_width));
    }

    Checkpoint ckp;
    ckp.config_text = io::read_string(is);
    const std::uint64_t count = io::read_u64(is);

    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string name = io::read_string(is);
        const std::uint32_t ndim = io::read_u32(is);
        if (ndim == 0 || ndim > 8) throw DataError("corrupt checkpoint: tensor rank " + std::to_string(ndim));
        Shape shape(ndim);
        for (auto& d : shape) d = static_cast<std::int64_t>(io::read_u64(is));
        Tensor t = Tensor::zeros(shape);
        auto& vals = t.ptr()->values;
        for (auto& v : vals) {
            v = (scalar_width == 8) ? io::read_f64(is) : static_cast<double>(io::read_f32(is));
        }
        ckp.params.put(name, std::move(t));
    }
    return ckp;
}

} // namespace frame
