#pragma once

#include "frame/config.hpp"
#include "frame/heads.hpp"
#include "frame/memory.hpp"
#include "frame/objectives.hpp"
#include "frame/teacher.hpp"
#include "frame/video.hpp"

namespace frame {

struct ModelConfig {
    EncoderConfig enc;
    HeadConfig heads;
    MemoryConfig mem;
    std::int64_t spatial_delta = 2;
    std::int64_t semantic_delta = 4;
    Stage1Weights w1;
    Stage2Weights w2;
    ScheduleConfig sched;
    bool mean_scaling = true;
    double scale_decay = 0.99;
    std::int64_t steps = 500;
    std::uint64_t seed = 1;
};

ModelConfig model_config(const RunConfig& rc);
TeacherConfig teacher_config(const RunConfig& rc);

// Stage 1 trains the encoder plus the two current-frame heads; stage 2 adds
// the memory modules and the two anticipation heads on top of a frozen
// stage-1 store.
void init_stage1_params(ParamStore& ps, const ModelConfig& cfg, Rng& rng);
void add_stage2_params(ParamStore& ps, const ModelConfig& cfg, Rng& rng);

struct Stage1Out {
    EncoderOutput enc;
    Tensor c_hat; // [1 x clip_dim]
    Tensor d_hat; // [N x dino_dim]
};

Stage1Out stage1_forward(const ParamStore& ps, const ModelConfig& cfg, const Tensor& frame,
                         std::int64_t timestamp);

struct Stage2Out {
    Tensor fused;        // [N x D] memory-enriched patch tokens
    Tensor c_hat_now;    // sem_dec(y_cls)
    Tensor c_hat_future; // sem_ant(y_cls)
    Tensor d_hat_now;    // spa_dec(fused)
    Tensor d_hat_future; // spa_ant(fused)
};

Stage2Out stage2_forward(const ParamStore& ps, const ModelConfig& cfg, const MemoryBank& bank,
                         const EncoderOutput& current);

bool has_memory_params(const ParamStore& ps);

// Per-frame patch features for evaluation, without gradients. With
// use_memory and memory parameters present, each frame is enriched through
// the bank (filled with the preceding frames); otherwise raw encoder tokens.
std::vector<Tensor> clip_features(const ParamStore& ps, const ModelConfig& cfg,
                                  const std::vector<Tensor>& frames, bool use_memory);

// Per-frame semantic projections decode_semantic(sem_dec, y_cls).
std::vector<Tensor> clip_cls_projections(const ParamStore& ps, const ModelConfig& cfg,
                                         const std::vector<Tensor>& frames);

} // namespace frame
