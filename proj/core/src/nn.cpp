#include "frame/nn.hpp"

namespace frame::nn {

void make_linear(ParamStore& ps, const std::string& prefix, std::int64_t in, std::int64_t out,
                 Rng& rng, double sigma) {
    ps.create_trunc_normal(prefix + ".w", {in, out}, rng, sigma);
    ps.create(prefix + ".b", {out});
}

Tensor apply_linear(const ParamStore& ps, const std::string& prefix, const Tensor& x) {
    return ops::linear(x, ps.get(prefix + ".w"), ps.get(prefix + ".b"));
}

void make_layer_norm(ParamStore& ps, const std::string& prefix, std::int64_t d) {
    Tensor& g = ps.create(prefix + ".g", {d});
    for (auto& v : g.ptr()->values) v = 1.0;
    ps.create(prefix + ".b", {d});
}

Tensor apply_layer_norm(const ParamStore& ps, const std::string& prefix, const Tensor& x) {
    return ops::layer_norm(x, ps.get(prefix + ".g"), ps.get(prefix + ".b"));
}

void make_attention(ParamStore& ps, const std::string& prefix, std::int64_t dq, std::int64_t dkv,
                    std::int64_t inner, std::int64_t dout, Rng& rng, double sigma) {
    ps.create_trunc_normal(prefix + ".wq", {dq, inner}, rng, sigma);
    ps.create(prefix + ".bq", {inner});
    ps.create_trunc_normal(prefix + ".wk", {dkv, inner}, rng, sigma);
    ps.create(prefix + ".bk", {inner});
    ps.create_trunc_normal(prefix + ".wv", {dkv, inner}, rng, sigma);
    ps.create(prefix + ".bv", {inner});
    ps.create_trunc_normal(prefix + ".wo", {inner, dout}, rng, sigma);
    ps.create(prefix + ".bo", {dout});
}

ops::AttentionParams attention_params(const ParamStore& ps, const std::string& prefix) {
    return ops::AttentionParams{
        ps.get(prefix + ".wq"), ps.get(prefix + ".bq"), ps.get(prefix + ".wk"),
        ps.get(prefix + ".bk"), ps.get(prefix + ".wv"), ps.get(prefix + ".bv"),
        ps.get(prefix + ".wo"), ps.get(prefix + ".bo")};
}

void make_block(ParamStore& ps, const std::string& prefix, std::int64_t dim, int heads,
                double mlp_ratio, Rng& rng, double sigma) {
    if (heads <= 0 || dim % heads != 0) {
        throw ConfigError("transformer block: width " + std::to_string(dim) +
                          " not divisible by " + std::to_string(heads) + " heads");
    }
    const auto hidden = static_cast<std::int64_t>(mlp_ratio * static_cast<double>(dim));
    make_layer_norm(ps, prefix + ".ln1", dim);
    make_attention(ps, prefix + ".attn", dim, dim, dim, dim, rng, sigma);
    make_layer_norm(ps, prefix + ".ln2", dim);
    make_linear(ps, prefix + ".mlp.fc1", dim, hidden, rng, sigma);
    make_linear(ps, prefix + ".mlp.fc2", hidden, dim, rng, sigma);
}

Tensor apply_block(const ParamStore& ps, const std::string& prefix, const Tensor& x, int heads) {
    Tensor h = apply_layer_norm(ps, prefix + ".ln1", x);
    Tensor attn = ops::multi_head_attention(h, h, h, heads, attention_params(ps, prefix + ".attn"));
    Tensor x1 = ops::add(x, attn);
    Tensor h2 = apply_layer_norm(ps, prefix + ".ln2", x1);
    Tensor mlp = apply_linear(ps, prefix + ".mlp.fc2",
                              ops::gelu(apply_linear(ps, prefix + ".mlp.fc1", h2)));
    return ops::add(x1, mlp);
}

} // namespace frame::nn
