#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "frame/vit.hpp"

namespace frame {

struct TeacherTargets {
    Tensor c_cls;   // [1 x Dc]
    Tensor d_patch; // [N x Dd]
    std::int64_t timestamp = 0;
};

class TeacherSource {
public:
    virtual ~TeacherSource() = default;
    // `index` is the 0-based frame position within the clip.
    virtual TeacherTargets extract(const Tensor& frame, std::int64_t index) = 0;
    virtual std::int64_t clip_dim() const = 0;
    virtual std::int64_t dino_dim() const = 0;
};

struct TeacherConfig {
    std::int64_t image_size = 64;
    std::int64_t patch_size = 8;
    std::int64_t embed_dim = 32;
    int depth = 2;
    int heads = 4;
    std::int64_t clip_dim = 32;
    std::int64_t dino_dim = 32;
    std::uint64_t seed = 7;
};

// Frozen, seeded, randomly initialized encoder with linear heads. Targets
// are a fixed deterministic function of the frame; no parameter exposes a
// gradient leaf.
class SyntheticTeacher : public TeacherSource {
public:
    explicit SyntheticTeacher(const TeacherConfig& cfg);

    TeacherTargets extract(const Tensor& frame, std::int64_t index) override;
    std::int64_t clip_dim() const override { return cfg_.clip_dim; }
    std::int64_t dino_dim() const override { return cfg_.dino_dim; }

    const TeacherConfig& config() const { return cfg_; }

private:
    TeacherConfig cfg_;
    EncoderConfig enc_cfg_;
    ParamStore params_;
};

// Binary layout (little-endian):
//   magic "FRAMEfeat" (9 bytes)
//   u32 version (1), u8 scalar width (4|8)
//   u32 Dc, u32 Dd, u32 N, u64 frame count
//   per frame: Dc reals (c_cls) then N*Dd reals (d_patch)
// Fixed record size gives O(1) access by frame index.
class FeatureCacheWriter {
public:
    FeatureCacheWriter(const std::filesystem::path& path, std::int64_t clip_dim,
                       std::int64_t dino_dim, std::int64_t n_patches, std::int64_t frames,
                       int scalar_width = 8);
    ~FeatureCacheWriter();
    FeatureCacheWriter(const FeatureCacheWriter&) = delete;
    FeatureCacheWriter& operator=(const FeatureCacheWriter&) = delete;

    void append(const TeacherTargets& t);
    void finish(); // errors unless exactly `frames` records were appended

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class FeatureCache : public TeacherSource {
public:
    explicit FeatureCache(const std::filesystem::path& path);
    ~FeatureCache() override;

    TeacherTargets read(std::int64_t index);
    TeacherTargets extract(const Tensor& frame, std::int64_t index) override;

    std::int64_t clip_dim() const override;
    std::int64_t dino_dim() const override;
    std::int64_t patches() const;
    std::int64_t frames() const;
    int scalar_width() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Training window around current frame `t` (frame timestamps are 1-based):
// past frames max(1, t-m)..t-1, distillation targets at t, anticipation
// targets at t+spatial_delta and t+semantic_delta.
struct WindowPlan {
    std::vector<std::int64_t> past;
    std::int64_t current = 0;
    std::int64_t spatial_target = 0;
    std::int64_t semantic_target = 0;
    bool valid = false; // false when the future targets fall past the video end
};

WindowPlan build_window(std::int64_t video_len, std::int64_t t, std::int64_t m = 5,
                        std::int64_t spatial_delta = 2, std::int64_t semantic_delta = 4);

} // namespace frame
