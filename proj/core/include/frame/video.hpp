#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "frame/rng.hpp"
#include "frame/tensor.hpp"

namespace frame {

enum class ShapeKind { Rectangle, Disc };

struct ObjectSpec {
    ShapeKind kind = ShapeKind::Rectangle;
    std::array<double, 3> color{1.0, 0.0, 0.0};
    std::int64_t x = 0, y = 0;   // top-left (rectangle) or center (disc)
    std::int64_t vx = 0, vy = 0; // pixels per frame
    std::int64_t width = 8, height = 8; // disc uses width as diameter
};

struct SceneSpec {
    std::uint64_t seed = 0;
    std::int64_t canvas = 64; // square
    std::int64_t frames = 10;
    std::vector<ObjectSpec> objects; // later entries occlude earlier ones
    void validate() const;
};

struct FrameTruth {
    std::vector<int> pixel_labels;               // [canvas*canvas], 0 = background
    std::vector<std::array<double, 2>> centroid; // per object (x, y); (-1,-1) if hidden
    std::vector<std::array<std::int64_t, 4>> bbox; // per object (minx, miny, maxx, maxy)
    std::vector<bool> visible;                   // per object
};

struct GroundTruth {
    std::vector<FrameTruth> frames;
};

struct Clip {
    SceneSpec spec;
    std::vector<Tensor> frames; // each [S x S x 3], values in [0,1]
    GroundTruth gt;
};

// Deterministic: equal specs give bit-identical clips. Motion wraps on the
// torus, so a velocity-(1,0) object's mask at t equals the mask at t-1
// shifted right by one pixel (cyclically).
Clip generate_clip(const SceneSpec& spec);

SceneSpec random_scene(Rng& rng, std::int64_t canvas, std::int64_t frames, int max_objects);

// Majority pixel label per patch cell; ties go to background (0).
std::vector<int> rasterize_patch_labels(const std::vector<int>& pixel_labels,
                                        std::int64_t canvas, std::int64_t patch_size);

// Directory layout: clip.txt manifest, frame_%04d.rgb raw little-endian
// f32 RGB, labels_%04d.pgm plain graymaps.
void export_clip(const std::filesystem::path& dir, const Clip& clip);
Clip import_clip(const std::filesystem::path& dir);

} // namespace frame
