#include "frame/model.hpp"

namespace frame {

ModelConfig model_config(const RunConfig& rc) {
    rc.validate();
    ModelConfig cfg;
    cfg.enc.image_size = rc.image_size;
    cfg.enc.patch_size = rc.patch_size;
    cfg.enc.embed_dim = rc.embed_dim;
    cfg.enc.depth = static_cast<int>(rc.depth);
    cfg.enc.heads = static_cast<int>(rc.heads);
    cfg.enc.mlp_ratio = rc.mlp_ratio;

    cfg.heads.input_dim = rc.embed_dim;
    cfg.heads.clip_dim = rc.clip_dim;
    cfg.heads.dino_dim = rc.dino_dim;
    cfg.heads.spatial_head_depth = static_cast<int>(rc.spatial_head_depth);
    cfg.heads.heads = static_cast<int>(rc.heads);
    cfg.heads.mlp_ratio = rc.mlp_ratio;

    cfg.mem.capacity = rc.memory_frames;
    cfg.mem.token_dim = rc.memory_dim;
    cfg.mem.model_dim = rc.embed_dim;
    cfg.mem.heads = static_cast<int>(rc.heads);
    cfg.mem.mlp_ratio = rc.mlp_ratio;

    cfg.spatial_delta = rc.spatial_delta;
    cfg.semantic_delta = rc.semantic_delta;
    cfg.w1 = {rc.lambda1, rc.lambda2};
    cfg.w2 = {rc.alpha1, rc.alpha2, rc.alpha3, rc.alpha4};
    cfg.sched = {rc.base_lr, rc.weight_decay, rc.warmup_steps, rc.restart_period, rc.min_lr};
    cfg.mean_scaling = rc.mean_scaling;
    cfg.scale_decay = rc.scale_decay;
    cfg.steps = rc.steps;
    cfg.seed = static_cast<std::uint64_t>(rc.seed);
    return cfg;
}

TeacherConfig teacher_config(const RunConfig& rc) {
    TeacherConfig cfg;
    cfg.image_size = rc.image_size;
    cfg.patch_size = rc.patch_size;
    cfg.embed_dim = rc.teacher_dim;
    cfg.depth = static_cast<int>(rc.teacher_depth);
    cfg.clip_dim = rc.clip_dim;
    cfg.dino_dim = rc.dino_dim;
    cfg.seed = static_cast<std::uint64_t>(rc.teacher_seed);
    return cfg;
}

void init_stage1_params(ParamStore& ps, const ModelConfig& cfg, Rng& rng) {
    init_encoder(ps, "enc", cfg.enc, rng);
    init_semantic_head(ps, "sem_dec", cfg.heads, rng);
    init_spatial_head(ps, "spa_dec", cfg.heads, rng);
}

void add_stage2_params(ParamStore& ps, const ModelConfig& cfg, Rng& rng) {
    init_memory(ps, "mem", cfg.mem, cfg.enc.patches(), rng);
    init_semantic_head(ps, "sem_ant", cfg.heads, rng);
    init_spatial_head(ps, "spa_ant", cfg.heads, rng);
}

Stage1Out stage1_forward(const ParamStore& ps, const ModelConfig& cfg, const Tensor& frame,
                         std::int64_t timestamp) {
    Stage1Out out;
    out.enc = encode(frame, cfg.enc, ps, "enc", timestamp);
    out.c_hat = decode_semantic(ps, "sem_dec", out.enc.y_cls);
    out.d_hat = decode_spatial(ps, "spa_dec", out.enc.y_patch, cfg.heads);
    return out;
}

Stage2Out stage2_forward(const ParamStore& ps, const ModelConfig& cfg, const MemoryBank& bank,
                         const EncoderOutput& current) {
    Stage2Out out;
    out.fused = memory_attend(bank, current, cfg.mem, ps, "mem");
    out.c_hat_now = decode_semantic(ps, "sem_dec", current.y_cls);
    out.c_hat_future = decode_semantic(ps, "sem_ant", current.y_cls);
    out.d_hat_now = decode_spatial(ps, "spa_dec", out.fused, cfg.heads);
    out.d_hat_future = decode_spatial(ps, "spa_ant", out.fused, cfg.heads);
    return out;
}

bool has_memory_params(const ParamStore& ps) { return ps.contains("mem.proj.w"); }

std::vector<Tensor> clip_features(const ParamStore& ps, const ModelConfig& cfg,
                                  const std::vector<Tensor>& frames, bool use_memory) {
    NoGradScope ng;
    const bool fuse = use_memory && has_memory_params(ps);
    std::vector<Tensor> out;
    out.reserve(frames.size());
    MemoryBank bank(cfg.mem.capacity);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto t = static_cast<std::int64_t>(i) + 1;
        EncoderOutput enc_out = encode(frames[i], cfg.enc, ps, "enc", t);
        if (fuse) {
            out.push_back(memory_attend(bank, enc_out, cfg.mem, ps, "mem"));
            push(bank, enc_out.y_patch, t, ps, "mem");
        } else {
            out.push_back(enc_out.y_patch);
        }
    }
    return out;
}

std::vector<Tensor> clip_cls_projections(const ParamStore& ps, const ModelConfig& cfg,
                                         const std::vector<Tensor>& frames) {
    NoGradScope ng;
    std::vector<Tensor> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        EncoderOutput enc_out = encode(frames[i], cfg.enc, ps, "enc",
                                       static_cast<std::int64_t>(i) + 1);
        out.push_back(decode_semantic(ps, "sem_dec", enc_out.y_cls));
    }
    return out;
}

} // namespace frame
