#pragma once

#include <string>

#include "frame/nn.hpp"

namespace frame {

struct EncoderConfig {
    std::int64_t image_size = 64; // square frames, H = W
    std::int64_t patch_size = 8;
    std::int64_t embed_dim = 64;
    int depth = 4;
    int heads = 4;
    double mlp_ratio = 4.0;

    std::int64_t grid() const { return image_size / patch_size; }
    std::int64_t patches() const { return grid() * grid(); }
    void validate() const;
};

struct EncoderOutput {
    Tensor y_cls;   // [1 x D]
    Tensor y_patch; // [N x D]
    std::int64_t timestamp = 0;
};

// Row i is the flattened patch_size x patch_size x 3 block in raster order
// (patches scanned left-to-right, top-to-bottom; within a patch, pixels in
// raster order with channels fastest).
Tensor patchify(const Tensor& frame, std::int64_t patch_size);

// Inverse of patchify; restores the [H x W x 3] frame bit-exactly.
Tensor unpatchify(const Tensor& patches, std::int64_t image_size, std::int64_t patch_size);

// Registers encoder parameters under `prefix`:
//   patch.{w,b}  cls  pos  block{i}.*  ln.{g,b} (final norm, depth >= 1 only)
void init_encoder(ParamStore& ps, const std::string& prefix, const EncoderConfig& cfg, Rng& rng);

// Bilinearly resamples an [n^2 x D] position grid to [m^2 x D].
Tensor interpolate_pos_grid(const Tensor& pos, std::int64_t from_grid, std::int64_t to_grid);

// Frames whose grid differs from cfg resample the stored patch-position grid;
// the CLS position row is kept as-is.
EncoderOutput encode(const Tensor& frame, const EncoderConfig& cfg, const ParamStore& ps,
                     const std::string& prefix, std::int64_t timestamp = 0);

} // namespace frame
