#pragma once

#include <string>

#include "frame/nn.hpp"

namespace frame {

struct HeadConfig {
    std::int64_t input_dim = 64;  // encoder width D
    std::int64_t clip_dim = 32;   // semantic target width
    std::int64_t dino_dim = 32;   // spatial target width
    int spatial_head_depth = 1;
    int heads = 4;
    double mlp_ratio = 4.0;
    void validate() const;
};

// Semantic head: single linear map D -> clip_dim, acting on the CLS row.
void init_semantic_head(ParamStore& ps, const std::string& prefix, const HeadConfig& cfg,
                        Rng& rng);
Tensor decode_semantic(const ParamStore& ps, const std::string& prefix, const Tensor& y_cls);

// Spatial head: spatial_head_depth pre-norm blocks over the patch tokens,
// then a linear map D -> dino_dim.
void init_spatial_head(ParamStore& ps, const std::string& prefix, const HeadConfig& cfg, Rng& rng);
Tensor decode_spatial(const ParamStore& ps, const std::string& prefix, const Tensor& y_patch,
                      const HeadConfig& cfg);

// The four independent heads: "sem_dec" and "spa_dec" learn current-frame
// targets, "sem_ant" and "spa_ant" learn future-frame targets.
void init_all_heads(ParamStore& ps, const HeadConfig& cfg, Rng& rng);

} // namespace frame
