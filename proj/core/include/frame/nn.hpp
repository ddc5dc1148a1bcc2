#pragma once

#include <string>

#include "frame/ops.hpp"
#include "frame/params.hpp"

namespace frame::nn {

// Registers weight [in x out] (truncated normal) and bias [out] (zeros)
// under `prefix + ".w"` / `prefix + ".b"`.
void make_linear(ParamStore& ps, const std::string& prefix, std::int64_t in, std::int64_t out,
                 Rng& rng, double sigma = 0.02);

Tensor apply_linear(const ParamStore& ps, const std::string& prefix, const Tensor& x);

// Registers gain (ones) and bias (zeros) of width d under
// `prefix + ".g"` / `prefix + ".b"`.
void make_layer_norm(ParamStore& ps, const std::string& prefix, std::int64_t d);

Tensor apply_layer_norm(const ParamStore& ps, const std::string& prefix, const Tensor& x);

// Pre-norm transformer block: x + MHA(LN(x)) then + MLP(LN(.)) with GELU,
// hidden width mlp_ratio * dim. Parameter names under `prefix`:
//   ln1.{g,b} attn.{wq,bq,wk,bk,wv,bv,wo,bo} ln2.{g,b} mlp.fc1.{w,b} mlp.fc2.{w,b}
void make_block(ParamStore& ps, const std::string& prefix, std::int64_t dim, int heads,
                double mlp_ratio, Rng& rng, double sigma = 0.02);

Tensor apply_block(const ParamStore& ps, const std::string& prefix, const Tensor& x, int heads);

ops::AttentionParams attention_params(const ParamStore& ps, const std::string& prefix);

// Cross-attention projections: queries of width dq, keys/values of width dkv,
// inner width `inner`, output width dout. Names as in make_block's attn group.
void make_attention(ParamStore& ps, const std::string& prefix, std::int64_t dq, std::int64_t dkv,
                    std::int64_t inner, std::int64_t dout, Rng& rng, double sigma = 0.02);

} // namespace frame::nn
