#include "frame/heads.hpp"

namespace frame {

void HeadConfig::validate() const {
    if (input_dim <= 0 || clip_dim <= 0 || dino_dim <= 0) {
        throw ConfigError("head dims must be positive");
    }
    if (spatial_head_depth < 1) {
        throw ConfigError("spatial head depth must be at least 1, got " +
                          std::to_string(spatial_head_depth));
    }
    if (heads <= 0 || input_dim % heads != 0) {
        throw ConfigError("head width " + std::to_string(input_dim) + " not divisible by " +
                          std::to_string(heads) + " heads");
    }
}

void init_semantic_head(ParamStore& ps, const std::string& prefix, const HeadConfig& cfg,
                        Rng& rng) {
    cfg.validate();
    nn::make_linear(ps, prefix, cfg.input_dim, cfg.clip_dim, rng);
}

Tensor decode_semantic(const ParamStore& ps, const std::string& prefix, const Tensor& y_cls) {
    return nn::apply_linear(ps, prefix, y_cls);
}

void init_spatial_head(ParamStore& ps, const std::string& prefix, const HeadConfig& cfg, Rng& rng) {
    cfg.validate();
    for (int i = 0; i < cfg.spatial_head_depth; ++i) {
        nn::make_block(ps, prefix + ".block" + std::to_string(i), cfg.input_dim, cfg.heads,
                       cfg.mlp_ratio, rng);
    }
    nn::make_linear(ps, prefix + ".out", cfg.input_dim, cfg.dino_dim, rng);
}

Tensor decode_spatial(const ParamStore& ps, const std::string& prefix, const Tensor& y_patch,
                      const HeadConfig& cfg) {
    Tensor x = y_patch;
    for (int i = 0; i < cfg.spatial_head_depth; ++i) {
        x = nn::apply_block(ps, prefix + ".block" + std::to_string(i), x, cfg.heads);
    }
    return nn::apply_linear(ps, prefix + ".out", x);
}

void init_all_heads(ParamStore& ps, const HeadConfig& cfg, Rng& rng) {
    init_semantic_head(ps, "sem_dec", cfg, rng);
    init_spatial_head(ps, "spa_dec", cfg, rng);
    init_semantic_head(ps, "sem_ant", cfg, rng);
    init_spatial_head(ps, "spa_ant", cfg, rng);
}

} // namespace frame
