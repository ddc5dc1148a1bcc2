#include "frame/video.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "frame/io.hpp"

namespace frame {

namespace {

std::int64_t wrap(std::int64_t v, std::int64_t s) {
    const std::int64_t r = v % s;
    return r < 0 ? r + s : r;
}

// Pixels covered by an object at its frame-t position, in wrapped canvas
// coordinates. Iterates the unwrapped bounding box so shapes stay rigid
// across the seam.
template <typename F>
void for_object_pixels(const ObjectSpec& o, std::int64_t t, std::int64_t s, F&& f) {
    const std::int64_t ox = o.x + o.vx * t;
    const std::int64_t oy = o.y + o.vy * t;
    if (o.kind == ShapeKind::Rectangle) {
        for (std::int64_t dy = 0; dy < o.height; ++dy) {
            for (std::int64_t dx = 0; dx < o.width; ++dx) {
                f(wrap(ox + dx, s), wrap(oy + dy, s));
            }
        }
    } else {
        const double r = static_cast<double>(o.width) / 2.0;
        const std::int64_t ir = static_cast<std::int64_t>(std::ceil(r));
        for (std::int64_t dy = -ir; dy <= ir; ++dy) {
            for (std::int64_t dx = -ir; dx <= ir; ++dx) {
                if (static_cast<double>(dx * dx + dy * dy) <= r * r) {
                    f(wrap(ox + dx, s), wrap(oy + dy, s));
                }
            }
        }
    }
}

} // namespace

void SceneSpec::validate() const {
    if (canvas <= 0 || frames <= 0) throw ConfigError("scene: canvas and frame count must be positive");
    for (std::size_t k = 0; k < objects.size(); ++k) {
        const auto& o = objects[k];
        const std::int64_t w = o.width;
        const std::int64_t h = (o.kind == ShapeKind::Rectangle) ? o.height : o.width;
        if (w <= 0 || h <= 0) {
            throw ConfigError("scene: object " + std::to_string(k) + " has empty extent");
        }
        if (w > canvas || h > canvas) {
            throw ConfigError("scene: object " + std::to_string(k) + " (" + std::to_string(w) +
                              "x" + std::to_string(h) + ") larger than canvas " +
                              std::to_string(canvas));
        }
    }
}

Clip generate_clip(const SceneSpec& spec) {
    spec.validate();
    const std::int64_t s = spec.canvas;
    const auto kcount = static_cast<int>(spec.objects.size());

    // Background: smooth gradient plus a seeded sinusoid, fixed per clip.
    Rng rng(spec.seed);
    Rng bg_rng = rng.stream("background");
    const double fx = static_cast<double>(bg_rng.uniform_int(1, 3));
    const double fy = static_cast<double>(bg_rng.uniform_int(1, 3));
    std::array<double, 3> phase{};
    for (auto& p : phase) p = bg_rng.uniform(0.0, 6.283185307179586);

    std::vector<double> background(static_cast<std::size_t>(s * s * 3));
    for (std::int64_t y = 0; y < s; ++y) {
        for (std::int64_t x = 0; x < s; ++x) {
            const double base =
                0.2 + 0.25 * static_cast<double>(x + y) / static_cast<double>(2 * (s - 1));
            const double wave = 6.283185307179586 *
                                (fx * static_cast<double>(x) + fy * static_cast<double>(y)) /
                                static_cast<double>(s);
            for (int c = 0; c < 3; ++c) {
                const double v = base + 0.12 * std::sin(wave + phase[static_cast<std::size_t>(c)]);
                background[static_cast<std::size_t>((y * s + x) * 3 + c)] = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    Clip clip;
    clip.spec = spec;
    clip.frames.reserve(static_cast<std::size_t>(spec.frames));
    clip.gt.frames.reserve(static_cast<std::size_t>(spec.frames));

    for (std::int64_t t = 0; t < spec.frames; ++t) {
        Tensor frame = Tensor::zeros({s, s, 3});
        auto& pix = frame.ptr()->values;
        pix = background;

        FrameTruth truth;
        truth.pixel_labels.assign(static_cast<std::size_t>(s * s), 0);
        truth.centroid.assign(static_cast<std::size_t>(kcount), {-1.0, -1.0});
        truth.bbox.assign(static_cast<std::size_t>(kcount), {0, 0, 0, 0});
        truth.visible.assign(static_cast<std::size_t>(kcount), false);

        // Draw in z-order; the label map keeps the topmost object.
        for (int k = 0; k < kcount; ++k) {
            const auto& o = spec.objects[static_cast<std::size_t>(k)];
            for_object_pixels(o, t, s, [&](std::int64_t px, std::int64_t py) {
                const auto at = static_cast<std::size_t>(py * s + px);
                truth.pixel_labels[at] = k + 1;
                for (int c = 0; c < 3; ++c) {
                    pix[at * 3 + static_cast<std::size_t>(c)] = o.color[static_cast<std::size_t>(c)];
                }
            });
        }

        // Centroid and bbox from visible pixels only (occluders erase them).
        std::vector<double> sx(static_cast<std::size_t>(kcount), 0.0);
        std::vector<double> sy(static_cast<std::size_t>(kcount), 0.0);
        std::vector<std::int64_t> cnt(static_cast<std::size_t>(kcount), 0);
        std::vector<std::array<std::int64_t, 4>> bb(
            static_cast<std::size_t>(kcount),
            {std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
             -1, -1});
        for (std::int64_t y = 0; y < s; ++y) {
            for (std::int64_t x = 0; x < s; ++x) {
                const int lab = truth.pixel_labels[static_cast<std::size_t>(y * s + x)];
                if (lab == 0) continue;
                const auto k = static_cast<std::size_t>(lab - 1);
                sx[k] += static_cast<double>(x);
                sy[k] += static_cast<double>(y);
                ++cnt[k];
                bb[k][0] = std::min(bb[k][0], x);
                bb[k][1] = std::min(bb[k][1], y);
                bb[k][2] = std::max(bb[k][2], x);
                bb[k][3] = std::max(bb[k][3], y);
            }
        }
        for (int k = 0; k < kcount; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (cnt[ku] > 0) {
                truth.visible[ku] = true;
                truth.centroid[ku] = {sx[ku] / static_cast<double>(cnt[ku]),
                                      sy[ku] / static_cast<double>(cnt[ku])};
                truth.bbox[ku] = bb[ku];
            }
        }

        clip.frames.push_back(std::move(frame));
        clip.gt.frames.push_back(std::move(truth));
    }
    return clip;
}

SceneSpec random_scene(Rng& rng, std::int64_t canvas, std::int64_t frames, int max_objects) {
    SceneSpec spec;
    spec.seed = rng.next_u64();
    spec.canvas = canvas;
    spec.frames = frames;
    const int count = static_cast<int>(rng.uniform_int(1, max_objects));
    for (int k = 0; k < count; ++k) {
        ObjectSpec o;
        o.kind = rng.uniform() < 0.5 ? ShapeKind::Rectangle : ShapeKind::Disc;
        for (auto& c : o.color) c = rng.uniform(0.1, 1.0);
        o.width = rng.uniform_int(canvas / 8, canvas / 3);
        o.height = (o.kind == ShapeKind::Rectangle) ? rng.uniform_int(canvas / 8, canvas / 3)
                                                    : o.width;
        o.x = rng.uniform_int(0, canvas - 1);
        o.y = rng.uniform_int(0, canvas - 1);
        o.vx = rng.uniform_int(-2, 2);
        o.vy = rng.uniform_int(-2, 2);
        spec.objects.push_back(o);
    }
    return spec;
}

std::vector<int> rasterize_patch_labels(const std::vector<int>& pixel_labels,
                                        std::int64_t canvas, std::int64_t patch_size) {
    if (patch_size <= 0 || canvas % patch_size != 0) {
        throw ConfigError("rasterize: canvas " + std::to_string(canvas) +
                          " not divisible by patch size " + std::to_string(patch_size));
    }
    if (static_cast<std::int64_t>(pixel_labels.size()) != canvas * canvas) {
        throw ShapeError("rasterize: " + std::to_string(pixel_labels.size()) + " labels for " +
                         std::to_string(canvas) + "x" + std::to_string(canvas));
    }
    const std::int64_t g = canvas / patch_size;
    std::vector<int> out(static_cast<std::size_t>(g * g), 0);
    for (std::int64_t pr = 0; pr < g; ++pr) {
        for (std::int64_t pc = 0; pc < g; ++pc) {
            std::map<int, std::int64_t> counts;
            for (std::int64_t dy = 0; dy < patch_size; ++dy) {
                for (std::int64_t dx = 0; dx < patch_size; ++dx) {
                    const auto at = static_cast<std::size_t>((pr * patch_size + dy) * canvas +
                                                             pc * patch_size + dx);
                    ++counts[pixel_labels[at]];
                }
            }
            int best = 0;
            std::int64_t best_count = -1;
            bool tie = false;
            for (const auto& [lab, n] : counts) {
                if (n > best_count) {
                    best = lab;
                    best_count = n;
                    tie = false;
                } else if (n == best_count) {
                    tie = true;
                }
            }
            out[static_cast<std::size_t>(pr * g + pc)] = tie ? 0 : best;
        }
    }
    return out;
}

void export_clip(const std::filesystem::path& dir, const Clip& clip) {
    std::filesystem::create_directories(dir);
    const std::int64_t s = clip.spec.canvas;
    const auto t_count = static_cast<std::int64_t>(clip.frames.size());
    const auto kcount = static_cast<int>(clip.spec.objects.size());

    std::ostringstream man;
    man << "size " << s << "\n";
    man << "frames " << t_count << "\n";
    man << "objects " << kcount << "\n";
    for (std::int64_t t = 0; t < t_count; ++t) {
        char rgb[32], pgm[32];
        std::snprintf(rgb, sizeof(rgb), "frame_%04lld.rgb", static_cast<long long>(t + 1));
        std::snprintf(pgm, sizeof(pgm), "labels_%04lld.pgm", static_cast<long long>(t + 1));
        man << "frame " << (t + 1) << " " << rgb << " " << pgm << "\n";

        std::ofstream os(dir / rgb, std::ios::binary);
        if (!os) throw DataError("cannot open for writing: " + (dir / rgb).string());
        for (double v : clip.frames[static_cast<std::size_t>(t)].values()) {
            io::write_f32(os, static_cast<float>(v));
        }

        const auto& truth = clip.gt.frames[static_cast<std::size_t>(t)];
        io::write_pgm(dir / pgm, truth.pixel_labels, s, s, std::max(kcount, 1));

        for (int k = 0; k < kcount; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (!truth.visible[ku]) continue;
            man << "centroid " << (t + 1) << " " << (k + 1) << " "
                << io::format_real(truth.centroid[ku][0]) << " "
                << io::format_real(truth.centroid[ku][1]) << "\n";
            man << "bbox " << (t + 1) << " " << (k + 1) << " " << truth.bbox[ku][0] << " "
                << truth.bbox[ku][1] << " " << truth.bbox[ku][2] << " " << truth.bbox[ku][3]
                << "\n";
        }
    }
    io::write_text_file(dir / "clip.txt", man.str());
}

namespace {

std::vector<int> read_pgm_labels(const std::filesystem::path& path, std::int64_t expect_side) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P2") throw DataError("not a plain graymap: " + path.string());
    std::int64_t w = 0, h = 0;
    int maxval = 0;
    is >> w >> h >> maxval;
    if (w != expect_side || h != expect_side) {
        throw DataError("label map " + path.string() + " is " + std::to_string(w) + "x" +
                        std::to_string(h) + ", expected " + std::to_string(expect_side));
    }
    std::vector<int> out(static_cast<std::size_t>(w * h));
    for (auto& v : out) {
        if (!(is >> v)) throw DataError("truncated graymap: " + path.string());
    }
    return out;
}

} // namespace

Clip import_clip(const std::filesystem::path& dir) {
    std::istringstream man(io::read_text_file(dir / "clip.txt"));

    Clip clip;
    std::int64_t s = 0, t_count = 0;
    int kcount = 0;
    std::map<std::int64_t, std::pair<std::string, std::string>> files;
    struct Kp {
        double x, y;
        std::array<std::int64_t, 4> bbox;
        bool has_bbox = false;
    };
    std::map<std::pair<std::int64_t, int>, Kp> marks;

    std::string line;
    while (std::getline(man, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "size") {
            ls >> s;
        } else if (key == "frames") {
            ls >> t_count;
        } else if (key == "objects") {
            ls >> kcount;
        } else if (key == "frame") {
            std::int64_t t;
            std::string rgb, pgm;
            ls >> t >> rgb >> pgm;
            files[t] = {rgb, pgm};
        } else if (key == "centroid") {
            std::int64_t t;
            int k;
            double x, y;
            ls >> t >> k >> x >> y;
            marks[{t, k}].x = x;
            marks[{t, k}].y = y;
        } else if (key == "bbox") {
            std::int64_t t;
            int k;
            std::array<std::int64_t, 4> bb{};
            ls >> t >> k >> bb[0] >> bb[1] >> bb[2] >> bb[3];
            marks[{t, k}].bbox = bb;
            marks[{t, k}].has_bbox = true;
        } else {
            throw DataError("clip manifest: unknown record '" + key + "'");
        }
        if (!ls && key != "size" && key != "frames" && key != "objects") {
            throw DataError("clip manifest: malformed line: " + line);
        }
    }
    if (s <= 0 || t_count <= 0 || static_cast<std::int64_t>(files.size()) != t_count) {
        throw DataError("clip manifest: missing or inconsistent header in " + dir.string());
    }

    clip.spec.canvas = s;
    clip.spec.frames = t_count;
    clip.spec.objects.resize(static_cast<std::size_t>(kcount));

    for (std::int64_t t = 1; t <= t_count; ++t) {
        auto it = files.find(t);
        if (it == files.end()) throw DataError("clip manifest: missing frame " + std::to_string(t));

        std::ifstream is(dir / it->second.first, std::ios::binary);
        if (!is) throw DataError("cannot open: " + (dir / it->second.first).string());
        Tensor frame = Tensor::zeros({s, s, 3});
        for (auto& v : frame.ptr()->values) v = static_cast<double>(io::read_f32(is));
        clip.frames.push_back(std::move(frame));

        FrameTruth truth;
        truth.pixel_labels = read_pgm_labels(dir / it->second.second, s);
        truth.centroid.assign(static_cast<std::size_t>(kcount), {-1.0, -1.0});
        truth.bbox.assign(static_cast<std::size_t>(kcount), {0, 0, 0, 0});
        truth.visible.assign(static_cast<std::size_t>(kcount), false);
        for (int k = 1; k <= kcount; ++k) {
            auto mk = marks.find({t, k});
            if (mk == marks.end()) continue;
            const auto ku = static_cast<std::size_t>(k - 1);
            truth.visible[ku] = true;
            truth.centroid[ku] = {mk->second.x, mk->second.y};
            if (mk->second.has_bbox) truth.bbox[ku] = mk->second.bbox;
        }
        clip.gt.frames.push_back(std::move(truth));
    }
    return clip;
}

} // namespace frame
