#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace frame {

// Flat key=value configuration. Every field is settable from a config file
// line or a --key=value flag; unknown keys are errors.
struct RunConfig {
    // encoder
    std::int64_t image_size = 64;
    std::int64_t patch_size = 8;
    std::int64_t embed_dim = 64;
    std::int64_t depth = 4;
    std::int64_t heads = 4;
    double mlp_ratio = 4.0;

    // heads
    std::int64_t clip_dim = 32;
    std::int64_t dino_dim = 32;
    std::int64_t spatial_head_depth = 1;

    // memory
    std::int64_t memory_frames = 5;
    std::int64_t memory_dim = 64;

    // anticipation deltas
    std::int64_t spatial_delta = 2;
    std::int64_t semantic_delta = 4;

    // loss weights
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double alpha1 = 0.2;
    double alpha2 = 0.1;
    double alpha3 = 2.0;
    double alpha4 = 0.4;

    // loss normalization
    bool mean_scaling = true;
    double scale_decay = 0.99;
    bool loss_dropout = false;  // accepted but unsupported; true is an error
    bool grad_balance = false;  // accepted but unsupported; true is an error

    // optimization
    double base_lr = 1e-4;
    double weight_decay = 1e-4;
    std::int64_t warmup_steps = 100;
    std::int64_t restart_period = 1000;
    double min_lr = 1e-6;
    std::int64_t steps = 500;

    // teacher
    std::int64_t teacher_seed = 7;
    std::int64_t teacher_depth = 2;
    std::int64_t teacher_dim = 32;

    // data and outputs
    std::string data;
    std::string features;
    std::string checkpoint;
    std::string out = "out";

    // evaluation protocol
    std::int64_t topk = 5;
    double temperature = 0.1;
    std::int64_t context_frames = 1;
    std::int64_t locality_radius = 12;
    std::int64_t probe_epochs = 100;
    double probe_lr = 0.05;
    std::int64_t max_delta = 8;
    bool use_memory = true;

    // synthetic data generation
    std::int64_t clips = 8;
    std::int64_t clip_frames = 12;
    std::int64_t max_objects = 3;

    // runtime
    std::int64_t seed = 1;
    std::int64_t threads = 1;
    bool deterministic = true;
    bool plots = false;
    std::string precision = "f32"; // f32 | f64

    void set(const std::string& key, const std::string& value);
    void load_file(const std::filesystem::path& path);
    void validate() const;

    // Sorted key=value lines; parsing the echo reproduces the config.
    std::string echo() const;
};

} // namespace frame
