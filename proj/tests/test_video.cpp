#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "frame/video.hpp"

using namespace frame;

namespace {

SceneSpec single_disc(std::int64_t vx = 0, std::int64_t vy = 0) {
    SceneSpec spec;
    spec.canvas = 32;
    spec.frames = 6;
    ObjectSpec disc;
    disc.kind = ShapeKind::Disc;
    disc.color = {0.2, 0.9, 0.4};
    disc.x = 16;
    disc.y = 16;
    disc.width = 9;
    disc.vx = vx;
    disc.vy = vy;
    spec.objects.push_back(disc);
    return spec;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("frame_video_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("equal specs render bit-identical clips") {
    Rng rng(41);
    SceneSpec spec = random_scene(rng, 32, 5, 3);
    Clip a = generate_clip(spec);
    Clip b = generate_clip(spec);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        CHECK(a.frames[t].values() == b.frames[t].values());
        CHECK(a.gt.frames[t].pixel_labels == b.gt.frames[t].pixel_labels);
    }
}

TEST_CASE("a static object renders identically in every frame") {
    Clip clip = generate_clip(single_disc(0, 0));
    for (std::size_t t = 1; t < clip.frames.size(); ++t) {
        CHECK(clip.frames[t].values() == clip.frames[0].values());
        CHECK(clip.gt.frames[t].pixel_labels == clip.gt.frames[0].pixel_labels);
        CHECK(clip.gt.frames[t].centroid[0] == clip.gt.frames[0].centroid[0]);
    }
}

TEST_CASE("unit velocity shifts the mask cyclically by one pixel") {
    SceneSpec spec = single_disc(1, 0);
    Clip clip = generate_clip(spec);
    const std::int64_t s = spec.canvas;
    for (std::size_t t = 1; t < clip.frames.size(); ++t) {
        const auto& prev = clip.gt.frames[t - 1].pixel_labels;
        const auto& cur = clip.gt.frames[t].pixel_labels;
        for (std::int64_t y = 0; y < s; ++y) {
            for (std::int64_t x = 0; x < s; ++x) {
                std::int64_t from = y * s + ((x - 1 + s) % s);
                CHECK(cur[static_cast<std::size_t>(y * s + x)] ==
                      prev[static_cast<std::size_t>(from)]);
            }
        }
    }
}

TEST_CASE("torus wrap brings an object back to its start") {
    SceneSpec spec = single_disc(4, 0); // 32 / 4 = 8 frames per revolution
    spec.frames = 9;
    Clip clip = generate_clip(spec);
    CHECK(clip.gt.frames[8].pixel_labels == clip.gt.frames[0].pixel_labels);
    CHECK(clip.frames[8].values() == clip.frames[0].values());
}

TEST_CASE("centroid tracks the visible mask mean") {
    Clip clip = generate_clip(single_disc(2, 1));
    const std::int64_t s = clip.spec.canvas;
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
        const auto& ft = clip.gt.frames[t];
        REQUIRE(ft.visible[0]);
        double sx = 0.0, sy = 0.0, n = 0.0;
        for (std::int64_t y = 0; y < s; ++y) {
            for (std::int64_t x = 0; x < s; ++x) {
                if (ft.pixel_labels[static_cast<std::size_t>(y * s + x)] == 1) {
                    sx += static_cast<double>(x);
                    sy += static_cast<double>(y);
                    n += 1.0;
                }
            }
        }
        REQUIRE(n > 0.0);
        CHECK(ft.centroid[0][0] == doctest::Approx(sx / n).epsilon(1e-9));
        CHECK(ft.centroid[0][1] == doctest::Approx(sy / n).epsilon(1e-9));
        CHECK(ft.bbox[0][0] <= static_cast<std::int64_t>(ft.centroid[0][0]));
        CHECK(ft.bbox[0][2] >= static_cast<std::int64_t>(ft.centroid[0][0]));
    }
}

TEST_CASE("full occlusion hides the object from the ground truth") {
    SceneSpec spec;
    spec.canvas = 32;
    spec.frames = 1;
    ObjectSpec below;
    below.kind = ShapeKind::Rectangle;
    below.x = 12;
    below.y = 12;
    below.width = 4;
    below.height = 4;
    ObjectSpec above = below; // later entry, same extent: fully occludes
    above.x = 10;
    above.y = 10;
    above.width = 10;
    above.height = 10;
    spec.objects = {below, above};
    Clip clip = generate_clip(spec);
    const auto& ft = clip.gt.frames[0];
    CHECK_FALSE(ft.visible[0]);
    CHECK(ft.centroid[0][0] == -1.0);
    CHECK(ft.centroid[0][1] == -1.0);
    CHECK(ft.visible[1]);
    for (int label : ft.pixel_labels) CHECK(label != 1);
}

TEST_CASE("scene validation") {
    SceneSpec spec = single_disc();
    spec.objects[0].width = 40; // larger than the canvas
    CHECK_THROWS_AS(generate_clip(spec), ConfigError);
    spec = single_disc();
    spec.frames = 0;
    CHECK_THROWS_AS(generate_clip(spec), ConfigError);
    spec = single_disc();
    spec.canvas = 0;
    CHECK_THROWS_AS(generate_clip(spec), ConfigError);
}

TEST_CASE("random scenes are reproducible per stream") {
    Rng a(7);
    Rng b(7);
    SceneSpec sa = random_scene(a, 64, 10, 4);
    SceneSpec sb = random_scene(b, 64, 10, 4);
    CHECK(sa.seed == sb.seed);
    REQUIRE(sa.objects.size() == sb.objects.size());
    for (std::size_t i = 0; i < sa.objects.size(); ++i) {
        CHECK(sa.objects[i].x == sb.objects[i].x);
        CHECK(sa.objects[i].vx == sb.objects[i].vx);
        CHECK(sa.objects[i].width == sb.objects[i].width);
    }
    CHECK(sa.objects.size() >= 1);
    CHECK(sa.objects.size() <= 4);

    Rng c(8);
    SceneSpec sc = random_scene(c, 64, 10, 4);
    CHECK(sc.seed != sa.seed);
}

TEST_CASE("patch label rasterization takes the cell majority") {
    // 4x4 canvas, patch 2: cells are 2x2 pixel blocks
    std::vector<int> pixels = {
        1, 1, 2, 2, //
        1, 0, 0, 2, //
        3, 3, 0, 0, //
        3, 3, 4, 0, //
    };
    std::vector<int> got = rasterize_patch_labels(pixels, 4, 2);
    REQUIRE(got.size() == 4);
    CHECK(got[0] == 1); // three of four
    CHECK(got[1] == 2); // three of four
    CHECK(got[2] == 3); // unanimous
    CHECK(got[3] == 0); // background majority

    CHECK_THROWS_AS(rasterize_patch_labels(pixels, 4, 3), ConfigError);
    CHECK_THROWS_AS(rasterize_patch_labels(pixels, 6, 2), ShapeError);
}

TEST_CASE("patch label ties between objects go to background") {
    std::vector<int> pixels = {
        1, 1, //
        2, 2, //
    };
    std::vector<int> got = rasterize_patch_labels(pixels, 2, 2);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == 0);
}

TEST_CASE("clip export and import round-trip") {
    TempDir dir;
    Rng rng(42);
    SceneSpec spec = random_scene(rng, 32, 4, 3);
    Clip clip = generate_clip(spec);
    export_clip(dir.path / "clip_0000", clip);
    Clip back = import_clip(dir.path / "clip_0000");

    REQUIRE(back.frames.size() == clip.frames.size());
    CHECK(back.spec.canvas == clip.spec.canvas);
    CHECK(back.spec.frames == clip.spec.frames);
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
        // frames round-trip through f32 storage
        const auto& want = clip.frames[t].values();
        const auto& got = back.frames[t].values();
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got[i] == static_cast<double>(static_cast<float>(want[i])));
        }
        CHECK(back.gt.frames[t].pixel_labels == clip.gt.frames[t].pixel_labels);
        CHECK(back.gt.frames[t].visible == clip.gt.frames[t].visible);
    }

    CHECK_THROWS_AS(import_clip(dir.path / "absent"), DataError);
}
