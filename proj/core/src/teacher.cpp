#include "frame/teacher.hpp"

#include <cmath>
#include <fstream>

#include "frame/io.hpp"

namespace frame {

SyntheticTeacher::SyntheticTeacher(const TeacherConfig& cfg) : cfg_(cfg) {
    enc_cfg_.image_size = cfg.image_size;
    enc_cfg_.patch_size = cfg.patch_size;
    enc_cfg_.embed_dim = cfg.embed_dim;
    enc_cfg_.depth = cfg.depth;
    enc_cfg_.heads = cfg.heads;
    Rng rng(cfg.seed);
    init_encoder(params_, "tch", enc_cfg_, rng);
    nn::make_linear(params_, "tch.sem", cfg.embed_dim, cfg.clip_dim, rng);
    nn::make_linear(params_, "tch.spa", cfg.embed_dim, cfg.dino_dim, rng);
    params_.set_requires_grad(false);
}

TeacherTargets SyntheticTeacher::extract(const Tensor& frame, std::int64_t index) {
    NoGradScope ng;
    EncoderOutput enc = encode(frame, enc_cfg_, params_, "tch", index);
    TeacherTargets out;
    out.c_cls = nn::apply_linear(params_, "tch.sem", enc.y_cls);
    out.d_patch = nn::apply_linear(params_, "tch.spa", enc.y_patch);
    out.timestamp = index;
    double norm = 0.0;
    for (double v : out.c_cls.values()) norm += v * v;
    if (norm == 0.0) throw DataError("teacher produced a zero-norm class vector");
    return out;
}

namespace {
constexpr char kMagic[9] = {'F', 'R', 'A', 'M', 'E', 'f', 'e', 'a', 't'};
constexpr std::uint32_t kVersion = 1;
} // namespace

struct FeatureCacheWriter::Impl {
    std::ofstream os;
    std::int64_t clip_dim, dino_dim, n_patches, frames;
    int scalar_width;
    std::int64_t written = 0;
    bool finished = false;
};

FeatureCacheWriter::FeatureCacheWriter(const std::filesystem::path& path, std::int64_t clip_dim,
                                       std::int64_t dino_dim, std::int64_t n_patches,
                                       std::int64_t frames, int scalar_width)
    : impl_(new Impl{{}, clip_dim, dino_dim, n_patches, frames, scalar_width}) {
    if (scalar_width != 4 && scalar_width != 8) {
        throw ConfigError("feature cache scalar width must be 4 or 8");
    }
    if (clip_dim <= 0 || dino_dim <= 0 || n_patches <= 0 || frames <= 0) {
        throw ConfigError("feature cache dims must be positive");
    }
    impl_->os.open(path, std::ios::binary);
    if (!impl_->os) throw DataError("cannot open for writing: " + path.string());
    io::write_bytes(impl_->os, kMagic, sizeof(kMagic));
    io::write_u32(impl_->os, kVersion);
    io::write_u8(impl_->os, static_cast<std::uint8_t>(scalar_width));
    io::write_u32(impl_->os, static_cast<std::uint32_t>(clip_dim));
    io::write_u32(impl_->os, static_cast<std::uint32_t>(dino_dim));
    io::write_u32(impl_->os, static_cast<std::uint32_t>(n_patches));
    io::write_u64(impl_->os, static_cast<std::uint64_t>(frames));
}

FeatureCacheWriter::~FeatureCacheWriter() = default;

void FeatureCacheWriter::append(const TeacherTargets& t) {
    if (impl_->written >= impl_->frames) {
        throw DataError("feature cache: more records than declared");
    }
    if (t.c_cls.shape() != Shape{1, impl_->clip_dim} ||
        t.d_patch.shape() != Shape{impl_->n_patches, impl_->dino_dim}) {
        throw ShapeError("feature cache: record " + shape_str(t.c_cls.shape()) + "/" +
                         shape_str(t.d_patch.shape()) + " does not match header");
    }
    auto put = [&](double v) {
        if (impl_->scalar_width == 8) {
            io::write_f64(impl_->os, v);
        } else {
            io::write_f32(impl_->os, static_cast<float>(v));
        }
    };
    for (double v : t.c_cls.values()) put(v);
    for (double v : t.d_patch.values()) put(v);
    ++impl_->written;
}

void FeatureCacheWriter::finish() {
    if (impl_->written != impl_->frames) {
        throw DataError("feature cache: wrote " + std::to_string(impl_->written) + " of " +
                        std::to_string(impl_->frames) + " records");
    }
    impl_->os.flush();
    if (!impl_->os) throw DataError("feature cache write failed");
    impl_->finished = true;
}

struct FeatureCache::Impl {
    std::ifstream is;
    std::filesystem::path path;
    std::int64_t clip_dim = 0, dino_dim = 0, n_patches = 0, frames = 0;
    int scalar_width = 8;
    std::streamoff header_size = 0;
    std::streamoff record_size = 0;
};

FeatureCache::FeatureCache(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->is.open(path, std::ios::binary);
    if (!impl_->is) throw DataError("cannot open: " + path.string());
    char magic[9];
    io::read_bytes(impl_->is, magic, sizeof(magic));
    if (std::string(magic, 9) != std::string(kMagic, 9)) {
        throw DataError("not a feature cache: " + path.string());
    }
    const std::uint32_t version = io::read_u32(impl_->is);
    if (version != kVersion) {
        throw DataError("unsupported feature cache version " + std::to_string(version));
    }
    impl_->scalar_width = io::read_u8(impl_->is);
    if (impl_->scalar_width != 4 && impl_->scalar_width != 8) {
        throw DataError("corrupt feature cache: scalar width");
    }
    impl_->clip_dim = io::read_u32(impl_->is);
    impl_->dino_dim = io::read_u32(impl_->is);
    impl_->n_patches = io::read_u32(impl_->is);
    impl_->frames = static_cast<std::int64_t>(io::read_u64(impl_->is));
    impl_->header_size = impl_->is.tellg();
    impl_->record_size = static_cast<std::streamoff>(
        (impl_->clip_dim + impl_->n_patches * impl_->dino_dim) * impl_->scalar_width);
    const auto expect = static_cast<std::uintmax_t>(impl_->header_size) +
                        static_cast<std::uintmax_t>(impl_->frames) *
                            static_cast<std::uintmax_t>(impl_->record_size);
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    if (ec || actual != expect) {
        throw DataError("feature cache truncated: " + path.string());
    }
}

FeatureCache::~FeatureCache() = default;

TeacherTargets FeatureCache::read(std::int64_t index) {
    if (index < 0 || index >= impl_->frames) {
        throw DataError("feature cache index " + std::to_string(index) + " out of range 0.." +
                        std::to_string(impl_->frames - 1));
    }
    impl_->is.clear();
    impl_->is.seekg(impl_->header_size + index * impl_->record_size);
    auto get = [&]() -> double {
        return impl_->scalar_width == 8 ? io::read_f64(impl_->is)
                                        : static_cast<double>(io::read_f32(impl_->is));
    };
    TeacherTargets out;
    out.c_cls = Tensor::zeros({1, impl_->clip_dim});
    out.d_patch = Tensor::zeros({impl_->n_patches, impl_->dino_dim});
    for (auto& v : out.c_cls.ptr()->values) v = get();
    for (auto& v : out.d_patch.ptr()->values) v = get();
    out.timestamp = index;
    double norm = 0.0;
    for (double v : out.c_cls.values()) norm += v * v;
    if (norm == 0.0) throw DataError("feature cache: zero-norm class vector at " + std::to_string(index));
    return out;
}

TeacherTargets FeatureCache::extract(const Tensor& frame, std::int64_t index) {
    (void)frame;
    return read(index);
}

std::int64_t FeatureCache::clip_dim() const { return impl_->clip_dim; }
std::int64_t FeatureCache::dino_dim() const { return impl_->dino_dim; }
std::int64_t FeatureCache::patches() const { return impl_->n_patches; }
std::int64_t FeatureCache::frames() const { return impl_->frames; }
int FeatureCache::scalar_width() const { return impl_->scalar_width; }

WindowPlan build_window(std::int64_t video_len, std::int64_t t, std::int64_t m,
                        std::int64_t spatial_delta, std::int64_t semantic_delta) {
    if (t < 1 || t > video_len) {
        throw ContractError("window: frame " + std::to_string(t) + " outside video 1.." +
                            std::to_string(video_len));
    }
    if (m < 0 || spatial_delta < 0 || semantic_delta < 0) {
        throw ConfigError("window: negative capacity or delta");
    }
    WindowPlan plan;
    for (std::int64_t p = std::max<std::int64_t>(1, t - m); p < t; ++p) plan.past.push_back(p);
    plan.current = t;
    plan.spatial_target = t + spatial_delta;
    plan.semantic_target = t + semantic_delta;
    plan.valid = std::max(plan.spatial_target, plan.semantic_target) <= video_len;
    return plan;
}

} // namespace frame
