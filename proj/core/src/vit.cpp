#include "frame/vit.hpp"

#include <cmath>

namespace frame {

void EncoderConfig::validate() const {
    if (image_size <= 0 || patch_size <= 0 || image_size % patch_size != 0) {
        throw ConfigError("encoder: image size " + std::to_string(image_size) +
                          " not divisible by patch size " + std::to_string(patch_size));
    }
    if (embed_dim <= 0 || heads <= 0 || embed_dim % heads != 0) {
        throw ConfigError("encoder: embed dim " + std::to_string(embed_dim) +
                          " not divisible by " + std::to_string(heads) + " heads");
    }
    if (depth < 0) throw ConfigError("encoder: negative depth");
}

Tensor patchify(const Tensor& frame, std::int64_t patch_size) {
    const auto& s = frame.shape();
    if (s.size() != 3 || s[2] != 3) {
        throw ShapeError("patchify: expects [H x W x 3], got " + shape_str(s));
    }
    const std::int64_t h = s[0], w = s[1], p = patch_size;
    if (p <= 0 || h % p != 0 || w % p != 0) {
        throw ConfigError("patchify: frame " + shape_str(s) + " not divisible by patch size " +
                          std::to_string(p));
    }
    const std::int64_t gh = h / p, gw = w / p, n = gh * gw, row = 3 * p * p;
    Tensor out = Tensor::zeros({n, row});
    const auto& in = frame.values();
    auto& ov = out.ptr()->values;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t pr = i / gw, pc = i % gw;
        std::size_t k = static_cast<std::size_t>(i * row);
        for (std::int64_t dy = 0; dy < p; ++dy) {
            for (std::int64_t dx = 0; dx < p; ++dx) {
                const std::size_t px =
                    static_cast<std::size_t>(((pr * p + dy) * w + (pc * p + dx)) * 3);
                ov[k++] = in[px];
                ov[k++] = in[px + 1];
                ov[k++] = in[px + 2];
            }
        }
    }
    return out;
}

Tensor unpatchify(const Tensor& patches, std::int64_t image_size, std::int64_t patch_size) {
    const std::int64_t p = patch_size, g = image_size / patch_size;
    if (patches.shape() != Shape{g * g, 3 * p * p}) {
        throw ShapeError("unpatchify: got " + shape_str(patches.shape()) + ", expected " +
                         shape_str({g * g, 3 * p * p}));
    }
    Tensor out = Tensor::zeros({image_size, image_size, 3});
    const auto& in = patches.values();
    auto& ov = out.ptr()->values;
    for (std::int64_t i = 0; i < g * g; ++i) {
        const std::int64_t pr = i / g, pc = i % g;
        std::size_t k = static_cast<std::size_t>(i * 3 * p * p);
        for (std::int64_t dy = 0; dy < p; ++dy) {
            for (std::int64_t dx = 0; dx < p; ++dx) {
                const std::size_t px =
                    static_cast<std::size_t>(((pr * p + dy) * image_size + (pc * p + dx)) * 3);
                ov[px] = in[k++];
                ov[px + 1] = in[k++];
                ov[px + 2] = in[k++];
            }
        }
    }
    return out;
}

void init_encoder(ParamStore& ps, const std::string& prefix, const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::int64_t n = cfg.patches(), d = cfg.embed_dim, in = 3 * cfg.patch_size * cfg.patch_size;
    nn::make_linear(ps, prefix + ".patch", in, d, rng);
    ps.create(prefix + ".cls", {1, d});
    ps.create_trunc_normal(prefix + ".pos", {n + 1, d}, rng);
    for (int i = 0; i < cfg.depth; ++i) {
        nn::make_block(ps, prefix + ".block" + std::to_string(i), d, cfg.heads, cfg.mlp_ratio, rng);
    }
    if (cfg.depth >= 1) nn::make_layer_norm(ps, prefix + ".ln", d);
}

Tensor interpolate_pos_grid(const Tensor& pos, std::int64_t from_grid, std::int64_t to_grid) {
    const std::int64_t d = pos.cols();
    if (pos.rows() != from_grid * from_grid) {
        throw ShapeError("pos grid: " + shape_str(pos.shape()) + " is not a " +
                         std::to_string(from_grid) + "x" + std::to_string(from_grid) + " grid");
    }
    if (to_grid == from_grid) return pos;
    Tensor out = Tensor::zeros({to_grid * to_grid, d});
    const auto& in = pos.values();
    auto& ov = out.ptr()->values;
    const double scale = (to_grid > 1)
                             ? static_cast<double>(from_grid - 1) / static_cast<double>(to_grid - 1)
                             : 0.0;
    const double center = (to_grid > 1) ? 0.0 : static_cast<double>(from_grid - 1) / 2.0;
    for (std::int64_t r = 0; r < to_grid; ++r) {
        const double sy = (to_grid > 1) ? r * scale : center;
        const auto y0 = static_cast<std::int64_t>(std::floor(sy));
        const std::int64_t y1 = std::min(y0 + 1, from_grid - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::int64_t c = 0; c < to_grid; ++c) {
            const double sx = (to_grid > 1) ? c * scale : center;
            const auto x0 = static_cast<std::int64_t>(std::floor(sx));
            const std::int64_t x1 = std::min(x0 + 1, from_grid - 1);
            const double fx = sx - static_cast<double>(x0);
            const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
            const double w10 = fy * (1 - fx), w11 = fy * fx;
            const std::size_t o = static_cast<std::size_t>((r * to_grid + c) * d);
            for (std::int64_t j = 0; j < d; ++j) {
                ov[o + j] = quantize(w00 * in[static_cast<std::size_t>((y0 * from_grid + x0) * d + j)] +
                                     w01 * in[static_cast<std::size_t>((y0 * from_grid + x1) * d + j)] +
                                     w10 * in[static_cast<std::size_t>((y1 * from_grid + x0) * d + j)] +
                                     w11 * in[static_cast<std::size_t>((y1 * from_grid + x1) * d + j)]);
            }
        }
    }
    return out;
}

EncoderOutput encode(const Tensor& frame, const EncoderConfig& cfg, const ParamStore& ps,
                     const std::string& prefix, std::int64_t timestamp) {
    cfg.validate();
    const auto& s = frame.shape();
    if (s.size() != 3 || s[0] != s[1] || s[2] != 3 || s[0] % cfg.patch_size != 0) {
        throw ShapeError("encode: frame " + shape_str(s) + " incompatible with patch size " +
                         std::to_string(cfg.patch_size));
    }
    const std::int64_t grid = s[0] / cfg.patch_size;
    const std::int64_t n = grid * grid;

    Tensor tokens = nn::apply_linear(ps, prefix + ".patch", patchify(frame, cfg.patch_size));
    Tensor z = ops::concat_rows({ps.get(prefix + ".cls"), tokens});

    const Tensor& pos = ps.get(prefix + ".pos");
    Tensor pos_use = pos;
    if (n != cfg.patches()) {
        Tensor cls_pos = ops::slice_rows(pos, 0, 1);
        Tensor grid_pos = ops::slice_rows(pos, 1, cfg.patches());
        pos_use = ops::concat_rows({cls_pos, interpolate_pos_grid(grid_pos, cfg.grid(), grid)});
    }
    z = ops::add(z, pos_use);

    for (int i = 0; i < cfg.depth; ++i) {
        z = nn::apply_block(ps, prefix + ".block" + std::to_string(i), z, cfg.heads);
    }
    if (cfg.depth >= 1) z = nn::apply_layer_norm(ps, prefix + ".ln", z);

    EncoderOutput out;
    out.y_cls = ops::slice_rows(z, 0, 1);
    out.y_patch = ops::slice_rows(z, 1, n);
    out.timestamp = timestamp;
    return out;
}

} // namespace frame
