#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "frame/checkpoint.hpp"
#include "frame/config.hpp"
#include "frame/eval.hpp"
#include "frame/io.hpp"
#include "frame/model.hpp"
#include "frame/teacher.hpp"
#include "frame/train.hpp"
#include "frame/video.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kUsage = R"(usage: frame <command> [--key=value ...]

commands:
  gen-data         write synthetic clips under --out
  train-stage1     distill encoder + current-frame heads from the teacher
  train-stage2     freeze the encoder, train memory + anticipation heads
  eval-prop        label propagation J&F and keypoint PCK
  eval-seg         linear-probe segmentation mIoU (current + future frame)
  eval-zeroshot    clip retrieval accuracy from projected CLS features
  eval-regions     pooled region tracking accuracy and IoU
  drift-profile    teacher feature drift vs frame offset (drift.csv)
  dump-features    export a feature cache to raw files + manifest
  import-features  build a feature cache from raw files + manifest

flags:
  any config key as --key=value; the resolved set is echoed to --out/config.txt
  --config=FILE    load key=value lines, later flags override
  --checkpoint=FILE  also seeds the config with the settings stored in it
  --data=DIR       clip directories (clip_*/clip.txt); empty = synthesize clips
  FRAME_SEED       environment variable, overrides the seed last

exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numeric failure
)";

std::string r(double v) { return frame::io::format_real(v); }

std::string clip_name(std::int64_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "clip_%04lld", static_cast<long long>(i));
    return buf;
}

void apply_pairs(frame::RunConfig& rc,
                 const std::vector<std::pair<std::string, std::string>>& pairs) {
    for (const auto& [key, value] : pairs) {
        if (key == "config") {
            rc.load_file(value);
        } else {
            rc.set(key, value);
        }
    }
}

// Checkpoints carry the training config; adopting it keeps eval shapes in
// sync. Path-like keys stay local to this invocation.
void apply_checkpoint_config(frame::RunConfig& rc, const std::string& text) {
    static const std::set<std::string> skip = {"data", "features", "checkpoint", "out"};
    std::istringstream in(text);
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw frame::DataError("checkpoint config line " + std::to_string(lineno) +
                                   ": missing '='");
        }
        const std::string key = line.substr(0, eq);
        if (skip.count(key)) continue;
        rc.set(key, line.substr(eq + 1));
    }
}

struct Resolved {
    frame::RunConfig rc;
    std::optional<frame::Checkpoint> ckpt;
};

Resolved resolve(const std::vector<std::pair<std::string, std::string>>& pairs) {
    frame::RunConfig scratch;
    apply_pairs(scratch, pairs);

    Resolved res;
    if (!scratch.checkpoint.empty()) {
        res.ckpt = frame::load_checkpoint(scratch.checkpoint);
        if (!res.ckpt->config_text.empty()) {
            apply_checkpoint_config(res.rc, res.ckpt->config_text);
        }
    }
    apply_pairs(res.rc, pairs);
    if (const char* env = std::getenv("FRAME_SEED")) res.rc.set("seed", env);
    if (res.rc.deterministic && res.rc.threads > 1) {
        std::cerr << "warning: deterministic mode forces threads=1\n";
        res.rc.threads = 1;
    }
    res.rc.validate();
    frame::set_precision(res.rc.precision == "f64" ? frame::Precision::f64
                                                   : frame::Precision::f32);
    return res;
}

frame::SceneSpec scene_for(frame::Rng& master, const frame::RunConfig& rc, std::int64_t index) {
    frame::Rng sub = master.stream("clip." + std::to_string(index));
    return frame::random_scene(sub, rc.image_size, rc.clip_frames,
                               static_cast<int>(rc.max_objects));
}

using NamedClips = std::vector<std::pair<std::string, frame::Clip>>;

NamedClips load_clips(const frame::RunConfig& rc) {
    NamedClips clips;
    if (rc.data.empty()) {
        frame::Rng rng(static_cast<std::uint64_t>(rc.seed));
        for (std::int64_t i = 0; i < rc.clips; ++i) {
            clips.emplace_back(clip_name(i), frame::generate_clip(scene_for(rng, rc, i)));
        }
        return clips;
    }
    const fs::path root(rc.data);
    if (!fs::is_directory(root)) throw frame::DataError("data directory not found: " + rc.data);
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "clip.txt")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw frame::DataError("no clips (*/clip.txt) under " + rc.data);
    for (const auto& dir : dirs) {
        clips.emplace_back(dir.filename().string(), frame::import_clip(dir));
    }
    return clips;
}

std::vector<frame::eval::LabelGrid> label_grids(const frame::Clip& clip, std::int64_t patch) {
    std::vector<frame::eval::LabelGrid> grids;
    grids.reserve(clip.gt.frames.size());
    for (const auto& truth : clip.gt.frames) {
        frame::eval::LabelGrid g;
        g.grid = clip.spec.canvas / patch;
        g.labels = frame::rasterize_patch_labels(truth.pixel_labels, clip.spec.canvas, patch);
        grids.push_back(std::move(g));
    }
    return grids;
}

struct EvalContext {
    frame::ModelConfig mc;
    frame::ParamStore ps;
    NamedClips clips;
};

EvalContext eval_context(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt,
                         const char* command) {
    if (!ckpt) {
        throw frame::ConfigError(std::string(command) + " requires --checkpoint=FILE");
    }
    EvalContext ctx{frame::model_config(rc), {}, load_clips(rc)};
    if (!rc.use_memory) ctx.mc.mem.capacity = 0;
    frame::adopt_model_params(ctx.ps, ckpt->params);
    return ctx;
}

int cmd_gen_data(const frame::RunConfig& rc) {
    frame::Rng rng(static_cast<std::uint64_t>(rc.seed));
    for (std::int64_t i = 0; i < rc.clips; ++i) {
        frame::export_clip(fs::path(rc.out) / clip_name(i),
                           frame::generate_clip(scene_for(rng, rc, i)));
    }
    std::cout << "gen-data: wrote " << rc.clips << " clips under " << rc.out << "\n";
    return 0;
}

int cmd_train(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt,
              bool stage2) {
    NamedClips named = load_clips(rc);
    std::vector<frame::Clip> clips;
    clips.reserve(named.size());
    for (auto& [name, clip] : named) clips.push_back(std::move(clip));

    frame::ModelConfig mc = frame::model_config(rc);
    if (!rc.use_memory) mc.mem.capacity = 0;

    frame::Rng rng(static_cast<std::uint64_t>(rc.seed));
    frame::ParamStore ps;
    if (stage2) {
        if (!ckpt) {
            throw frame::ConfigError("train-stage2 requires --checkpoint=FILE (stage-1 output)");
        }
        frame::adopt_model_params(ps, ckpt->params);
        if (!frame::has_memory_params(ps)) frame::add_stage2_params(ps, mc, rng);
    } else if (ckpt) {
        frame::adopt_model_params(ps, ckpt->params);
    } else {
        frame::init_stage1_params(ps, mc, rng);
    }

    frame::SyntheticTeacher teacher(frame::teacher_config(rc));

    frame::io::CsvWriter log(fs::path(rc.out) / "train_log.csv");
    if (stage2) {
        log.header({"step", "lr", "loss", "semantic_now", "semantic_future", "spatial_now",
                    "spatial_future"});
    } else {
        log.header({"step", "lr", "loss", "semantic", "spatial"});
    }
    std::vector<double> curve;
    auto log_fn = [&](const frame::TrainLogRow& row) {
        std::vector<std::string> cells{std::to_string(row.step), r(row.lr), r(row.loss)};
        for (double c : row.components) cells.push_back(r(c));
        log.row(cells);
        curve.push_back(row.loss);
    };

    const frame::TrainResult res = stage2 ? frame::train_stage2(ps, mc, clips, teacher, log_fn)
                                          : frame::train_stage1(ps, mc, clips, teacher, log_fn);
    log.flush();

    const char* ckpt_name = stage2 ? "stage2.ckpt" : "stage1.ckpt";
    frame::save_checkpoint(fs::path(rc.out) / ckpt_name, ps, rc.echo());

    if (rc.plots && !curve.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        const std::size_t samples = std::min<std::size_t>(curve.size(), 16);
        for (std::size_t i = 0; i < samples; ++i) {
            const std::size_t idx =
                samples == 1 ? 0 : i * (curve.size() - 1) / (samples - 1);
            bars.emplace_back(std::to_string(idx), curve[idx]);
        }
        frame::io::write_svg_bars(fs::path(rc.out) / "loss.svg",
                                  stage2 ? "stage-2 loss" : "stage-1 loss", bars);
    }

    std::cout << (stage2 ? "train-stage2" : "train-stage1") << ": " << res.steps
              << " steps, loss " << r(res.initial_loss) << " -> " << r(res.final_loss) << " ("
              << ckpt_name << ", train_log.csv)\n";
    return 0;
}

int cmd_eval_prop(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt) {
    EvalContext ctx = eval_context(rc, ckpt, "eval-prop");
    const frame::eval::PropagationConfig pcfg{rc.topk, rc.temperature, rc.context_frames,
                                              rc.locality_radius};

    frame::io::CsvWriter csv(fs::path(rc.out) / "metrics.csv");
    csv.header({"video", "j", "f", "jf", "pck01", "pck02"});
    if (rc.plots) fs::create_directories(fs::path(rc.out) / "pgm");

    double sum_j = 0, sum_f = 0, sum_jf = 0, sum_p1 = 0, sum_p2 = 0;
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [name, clip] : ctx.clips) {
        const auto features = frame::clip_features(ctx.ps, ctx.mc, clip.frames, rc.use_memory);
        const auto gt = label_grids(clip, rc.patch_size);
        const auto soft = frame::eval::propagate_labels(features, gt.front(), pcfg);
        std::vector<frame::eval::LabelGrid> pred;
        pred.reserve(soft.size());
        for (const auto& s : soft) pred.push_back({s.grid, s.hard()});
        const frame::eval::JFMetrics jf = frame::eval::jaccard_and_boundary(pred, gt);

        std::vector<std::array<double, 2>> kp0;
        std::vector<std::size_t> kp_obj;
        const auto& first = clip.gt.frames.front();
        for (std::size_t k = 0; k < first.visible.size(); ++k) {
            if (first.visible[k]) {
                kp0.push_back(first.centroid[k]);
                kp_obj.push_back(k);
            }
        }
        std::vector<std::array<double, 2>> kp_pred, kp_gt;
        std::vector<std::array<std::int64_t, 4>> kp_bbox;
        if (!kp0.empty()) {
            const frame::eval::LabelGrid seed =
                frame::eval::keypoints_to_grid(kp0, clip.spec.canvas, rc.patch_size);
            const auto ksoft = frame::eval::propagate_labels(features, seed, pcfg);
            for (std::size_t t = 1; t < ksoft.size(); ++t) {
                const auto points = frame::eval::grid_to_keypoints(
                    ksoft[t], static_cast<std::int64_t>(kp0.size()), rc.patch_size);
                const auto& truth = clip.gt.frames[t];
                for (std::size_t j = 0; j < kp_obj.size(); ++j) {
                    const std::size_t k = kp_obj[j];
                    if (!truth.visible[k]) continue;
                    kp_pred.push_back(points[j]);
                    kp_gt.push_back(truth.centroid[k]);
                    kp_bbox.push_back(truth.bbox[k]);
                }
            }
        }
        const std::vector<double> pck_scores =
            kp_pred.empty() ? std::vector<double>{1.0, 1.0}
                            : frame::eval::pck(kp_pred, kp_gt, kp_bbox, {0.1, 0.2});

        csv.row({name, r(jf.j_mean), r(jf.f_mean), r(jf.jf_mean), r(pck_scores[0]),
                 r(pck_scores[1])});
        sum_j += jf.j_mean;
        sum_f += jf.f_mean;
        sum_jf += jf.jf_mean;
        sum_p1 += pck_scores[0];
        sum_p2 += pck_scores[1];
        bars.emplace_back(name, jf.jf_mean);

        if (rc.plots) {
            for (std::size_t t = 0; t < pred.size(); ++t) {
                int maxv = 1;
                for (int v : pred[t].labels) maxv = std::max(maxv, v);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s_pred_%04zu.pgm", name.c_str(), t);
                frame::io::write_pgm(fs::path(rc.out) / "pgm" / buf, pred[t].labels,
                                     pred[t].grid, pred[t].grid, maxv);
            }
        }
    }
    const double n = static_cast<double>(ctx.clips.size());
    csv.row({"mean", r(sum_j / n), r(sum_f / n), r(sum_jf / n), r(sum_p1 / n), r(sum_p2 / n)});
    csv.flush();
    if (rc.plots) {
        frame::io::write_svg_bars(fs::path(rc.out) / "jf.svg", "propagation J&F", bars);
    }
    std::cout << "eval-prop: J&F " << r(sum_jf / n) << ", PCK@0.1 " << r(sum_p1 / n)
              << " over " << ctx.clips.size() << " clips (metrics.csv)\n";
    return 0;
}

std::vector<int> grid_classes(const std::vector<frame::eval::LabelGrid>& grids) {
    std::set<int> seen;
    for (const auto& g : grids) {
        for (int v : g.labels) seen.insert(v);
    }
    return {seen.begin(), seen.end()};
}

int cmd_eval_seg(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt) {
    EvalContext ctx = eval_context(rc, ckpt, "eval-seg");
    if (ctx.clips.size() < 2) {
        throw frame::DataError("eval-seg needs at least 2 clips for a train/test split");
    }
    const std::size_t split = (ctx.clips.size() + 1) / 2;
    const std::int64_t delta = rc.spatial_delta;

    std::vector<std::vector<frame::Tensor>> feats;
    std::vector<std::vector<frame::eval::LabelGrid>> grids;
    for (const auto& [name, clip] : ctx.clips) {
        feats.push_back(frame::clip_features(ctx.ps, ctx.mc, clip.frames, rc.use_memory));
        grids.push_back(label_grids(clip, rc.patch_size));
    }

    std::vector<frame::Tensor> x_now, x_future;
    std::vector<frame::eval::LabelGrid> y_now, y_future;
    for (std::size_t i = 0; i < split; ++i) {
        for (std::size_t t = 0; t < feats[i].size(); ++t) {
            x_now.push_back(feats[i][t]);
            y_now.push_back(grids[i][t]);
            if (t + static_cast<std::size_t>(delta) < feats[i].size()) {
                x_future.push_back(feats[i][t]);
                y_future.push_back(grids[i][t + static_cast<std::size_t>(delta)]);
            }
        }
    }
    if (x_future.empty()) {
        throw frame::DataError("clips too short for spatial_delta=" + std::to_string(delta));
    }
    const frame::eval::LinearProbe probe_now =
        frame::eval::fit_linear_head(x_now, y_now, rc.probe_epochs, rc.probe_lr);
    const frame::eval::LinearProbe probe_future =
        frame::eval::fit_linear_head(x_future, y_future, rc.probe_epochs, rc.probe_lr);

    frame::io::CsvWriter csv(fs::path(rc.out) / "metrics.csv");
    csv.header({"video", "miou_now", "miou_future"});
    double sum_now = 0, sum_future = 0;
    std::vector<std::pair<std::string, double>> bars;
    for (std::size_t i = split; i < ctx.clips.size(); ++i) {
        std::vector<frame::eval::LabelGrid> pn, gn, pf, gf;
        for (std::size_t t = 0; t < feats[i].size(); ++t) {
            pn.push_back({grids[i][t].grid, probe_now.predict(feats[i][t])});
            gn.push_back(grids[i][t]);
            if (t + static_cast<std::size_t>(delta) < feats[i].size()) {
                pf.push_back({grids[i][t].grid, probe_future.predict(feats[i][t])});
                gf.push_back(grids[i][t + static_cast<std::size_t>(delta)]);
            }
        }
        const double m_now = frame::eval::miou(pn, gn, grid_classes(gn));
        const double m_future = frame::eval::miou(pf, gf, grid_classes(gf));
        csv.row({ctx.clips[i].first, r(m_now), r(m_future)});
        sum_now += m_now;
        sum_future += m_future;
        bars.emplace_back(ctx.clips[i].first, m_now);
    }
    const double n = static_cast<double>(ctx.clips.size() - split);
    csv.row({"mean", r(sum_now / n), r(sum_future / n)});
    csv.flush();
    if (rc.plots) {
        frame::io::write_svg_bars(fs::path(rc.out) / "miou.svg", "probe mIoU (current)", bars);
    }
    std::cout << "eval-seg: mIoU now " << r(sum_now / n) << ", future " << r(sum_future / n)
              << " over " << ctx.clips.size() - split << " test clips (metrics.csv)\n";
    return 0;
}

int cmd_eval_zeroshot(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt) {
    EvalContext ctx = eval_context(rc, ckpt, "eval-zeroshot");
    frame::SyntheticTeacher teacher(frame::teacher_config(rc));

    const auto count = static_cast<std::int64_t>(ctx.clips.size());
    const std::int64_t dc = teacher.clip_dim();
    frame::Tensor embeddings = frame::Tensor::zeros({count, dc});
    for (std::int64_t i = 0; i < count; ++i) {
        const auto& frames = ctx.clips[static_cast<std::size_t>(i)].second.frames;
        for (std::size_t t = 0; t < frames.size(); ++t) {
            const frame::TeacherTargets targets =
                teacher.extract(frames[t], static_cast<std::int64_t>(t));
            for (std::int64_t c = 0; c < dc; ++c) {
                embeddings.values()[static_cast<std::size_t>(i * dc + c)] +=
                    targets.c_cls.values()[static_cast<std::size_t>(c)];
            }
        }
        for (std::int64_t c = 0; c < dc; ++c) {
            embeddings.values()[static_cast<std::size_t>(i * dc + c)] /=
                static_cast<double>(frames.size());
        }
    }

    frame::io::CsvWriter csv(fs::path(rc.out) / "metrics.csv");
    csv.header({"video", "predicted", "correct"});
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < count; ++i) {
        const auto& [name, clip] = ctx.clips[static_cast<std::size_t>(i)];
        const auto cls = frame::clip_cls_projections(ctx.ps, ctx.mc, clip.frames);
        const int predicted = frame::eval::zero_shot_classify(cls, embeddings);
        const bool ok = predicted == static_cast<int>(i);
        hits += ok ? 1 : 0;
        csv.row({name, std::to_string(predicted), ok ? "1" : "0"});
    }
    const double accuracy = static_cast<double>(hits) / static_cast<double>(count);
    csv.row({"mean", "", r(accuracy)});
    csv.flush();
    std::cout << "eval-zeroshot: accuracy " << r(accuracy) << " over " << count
              << " clips (metrics.csv)\n";
    return 0;
}

double mask_iou(const std::vector<bool>& a, const std::vector<bool>& b) {
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) ++inter;
        if (a[i] || b[i]) ++uni;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

int cmd_eval_regions(const frame::RunConfig& rc, const std::optional<frame::Checkpoint>& ckpt) {
    EvalContext ctx = eval_context(rc, ckpt, "eval-regions");

    frame::io::CsvWriter csv(fs::path(rc.out) / "metrics.csv");
    csv.header({"video", "accuracy", "iou"});
    double sum_acc = 0, sum_iou = 0;
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [name, clip] : ctx.clips) {
        const auto features = frame::clip_features(ctx.ps, ctx.mc, clip.frames, rc.use_memory);
        const auto grids = label_grids(clip, rc.patch_size);
        const std::size_t frames = grids.size();
        const auto cells = static_cast<std::size_t>(grids[0].grid * grids[0].grid);
        const std::size_t objects = clip.spec.objects.size();

        std::vector<std::vector<std::vector<bool>>> proposals(frames);
        std::vector<std::vector<std::size_t>> owner(frames);
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t k = 0; k < objects; ++k) {
                std::vector<bool> mask(cells, false);
                bool any = false;
                for (std::size_t c = 0; c < cells; ++c) {
                    if (grids[t].labels[c] == static_cast<int>(k) + 1) {
                        mask[c] = true;
                        any = true;
                    }
                }
                if (any) {
                    proposals[t].push_back(std::move(mask));
                    owner[t].push_back(k);
                }
            }
        }

        const auto assigned = frame::eval::track_regions(features, proposals);
        double hits = 0, iou_total = 0;
        std::int64_t pairs = 0;
        for (std::size_t t = 1; t < frames; ++t) {
            for (std::size_t a = 0; a < owner[0].size(); ++a) {
                const std::size_t object = owner[0][a];
                int correct = -1;
                for (std::size_t p = 0; p < owner[t].size(); ++p) {
                    if (owner[t][p] == object) correct = static_cast<int>(p);
                }
                if (correct < 0) continue;
                ++pairs;
                const int got = assigned[t][a];
                if (got == correct) hits += 1.0;
                if (got >= 0) {
                    iou_total += mask_iou(proposals[t][static_cast<std::size_t>(got)],
                                          proposals[t][static_cast<std::size_t>(correct)]);
                }
            }
        }
        const double accuracy = pairs == 0 ? 1.0 : hits / static_cast<double>(pairs);
        const double iou = pairs == 0 ? 1.0 : iou_total / static_cast<double>(pairs);
        csv.row({name, r(accuracy), r(iou)});
        sum_acc += accuracy;
        sum_iou += iou;
        bars.emplace_back(name, iou);
    }
    const double n = static_cast<double>(ctx.clips.size());
    csv.row({"mean", r(sum_acc / n), r(sum_iou / n)});
    csv.flush();
    if (rc.plots) {
        frame::io::write_svg_bars(fs::path(rc.out) / "region_iou.svg", "region tracking IoU",
                                  bars);
    }
    std::cout << "eval-regions: accuracy " << r(sum_acc / n) << ", IoU " << r(sum_iou / n)
              << " over " << ctx.clips.size() << " clips (metrics.csv)\n";
    return 0;
}

int cmd_drift_profile(const frame::RunConfig& rc) {
    const NamedClips clips = load_clips(rc);
    frame::SyntheticTeacher teacher(frame::teacher_config(rc));

    std::vector<double> semantic(static_cast<std::size_t>(rc.max_delta), 0.0);
    std::vector<double> spatial(static_cast<std::size_t>(rc.max_delta), 0.0);
    for (const auto& [name, clip] : clips) {
        std::vector<frame::TeacherTargets> targets;
        targets.reserve(clip.frames.size());
        for (std::size_t t = 0; t < clip.frames.size(); ++t) {
            targets.push_back(teacher.extract(clip.frames[t], static_cast<std::int64_t>(t)));
        }
        const auto rows = frame::eval::feature_drift_profile(targets, rc.max_delta);
        for (std::size_t q = 0; q < rows.size(); ++q) {
            semantic[q] += rows[q].semantic;
            spatial[q] += rows[q].spatial;
        }
    }
    const double n = static_cast<double>(clips.size());

    frame::io::CsvWriter csv(fs::path(rc.out) / "drift.csv");
    csv.header({"delta", "semantic", "spatial"});
    std::vector<std::pair<std::string, double>> sem_bars, spa_bars;
    for (std::size_t q = 0; q < semantic.size(); ++q) {
        const std::string delta = std::to_string(q + 1);
        csv.row({delta, r(semantic[q] / n), r(spatial[q] / n)});
        sem_bars.emplace_back(delta, semantic[q] / n);
        spa_bars.emplace_back(delta, spatial[q] / n);
    }
    csv.flush();
    if (rc.plots) {
        frame::io::write_svg_bars(fs::path(rc.out) / "drift_semantic.svg",
                                  "class-vector drift", sem_bars);
        frame::io::write_svg_bars(fs::path(rc.out) / "drift_spatial.svg", "patch drift",
                                  spa_bars);
    }
    std::cout << "drift-profile: " << rc.max_delta << " offsets over " << clips.size()
              << " clips (drift.csv)\n";
    return 0;
}

constexpr const char* kManifest = "features.txt";

void write_raw_reals(const fs::path& path, const std::vector<double>& values, int width) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw frame::DataError("cannot open for writing: " + path.string());
    for (double v : values) {
        if (width == 8) {
            frame::io::write_f64(os, v);
        } else {
            frame::io::write_f32(os, static_cast<float>(v));
        }
    }
    if (!os) throw frame::DataError("write failed: " + path.string());
}

std::vector<double> read_raw_reals(const fs::path& path, std::int64_t count, int width) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw frame::DataError("cannot open: " + path.string());
    std::vector<double> values(static_cast<std::size_t>(count));
    for (auto& v : values) {
        v = width == 8 ? frame::io::read_f64(is) : static_cast<double>(frame::io::read_f32(is));
    }
    if (is.peek() != std::ifstream::traits_type::eof()) {
        throw frame::DataError("trailing bytes in " + path.string());
    }
    return values;
}

int cmd_dump_features(const frame::RunConfig& rc) {
    fs::path cache_path;
    if (!rc.features.empty()) {
        cache_path = rc.features;
    } else {
        // No cache given: build one from the teacher over the clips, then dump it.
        const NamedClips clips = load_clips(rc);
        frame::SyntheticTeacher teacher(frame::teacher_config(rc));
        std::int64_t total = 0;
        for (const auto& [name, clip] : clips) {
            total += static_cast<std::int64_t>(clip.frames.size());
        }
        const std::int64_t grid = rc.image_size / rc.patch_size;
        cache_path = fs::path(rc.out) / "features.feat";
        frame::FeatureCacheWriter writer(cache_path, teacher.clip_dim(), teacher.dino_dim(),
                                         grid * grid, total, rc.precision == "f64" ? 8 : 4);
        for (const auto& [name, clip] : clips) {
            for (std::size_t t = 0; t < clip.frames.size(); ++t) {
                writer.append(teacher.extract(clip.frames[t], static_cast<std::int64_t>(t)));
            }
        }
        writer.finish();
    }

    frame::FeatureCache cache(cache_path);
    const int width = cache.scalar_width();
    std::ostringstream manifest;
    manifest << "features 1\n";
    manifest << "width " << width << "\n";
    manifest << "clip-dim " << cache.clip_dim() << "\n";
    manifest << "dino-dim " << cache.dino_dim() << "\n";
    manifest << "patches " << cache.patches() << "\n";
    manifest << "frames " << cache.frames() << "\n";
    for (std::int64_t i = 0; i < cache.frames(); ++i) {
        char c_name[32], d_name[32];
        std::snprintf(c_name, sizeof c_name, "c_%06lld.bin", static_cast<long long>(i));
        std::snprintf(d_name, sizeof d_name, "d_%06lld.bin", static_cast<long long>(i));
        const frame::TeacherTargets targets = cache.read(i);
        write_raw_reals(fs::path(rc.out) / c_name, targets.c_cls.values(), width);
        write_raw_reals(fs::path(rc.out) / d_name, targets.d_patch.values(), width);
        manifest << "record " << i << " " << c_name << " " << d_name << "\n";
    }
    frame::io::write_text_file(fs::path(rc.out) / kManifest, manifest.str());
    std::cout << "dump-features: " << cache.frames() << " frames from " << cache_path.string()
              << " to " << rc.out << "\n";
    return 0;
}

int cmd_import_features(const frame::RunConfig& rc) {
    if (rc.data.empty()) {
        throw frame::ConfigError("import-features requires --data=DIR (raw feature directory)");
    }
    const fs::path dir(rc.data);
    std::istringstream manifest(frame::io::read_text_file(dir / kManifest));

    int version = 0, width = 0;
    std::int64_t clip_dim = -1, dino_dim = -1, patches = -1, frames = -1;
    std::vector<std::pair<std::string, std::string>> records;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(manifest, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string keyword;
        in >> keyword;
        const std::string where = "features.txt line " + std::to_string(lineno);
        auto want = [&](auto& slot) {
            if (!(in >> slot)) throw frame::DataError(where + ": malformed " + keyword);
        };
        if (keyword == "features") {
            want(version);
        } else if (keyword == "width") {
            want(width);
        } else if (keyword == "clip-dim") {
            want(clip_dim);
        } else if (keyword == "dino-dim") {
            want(dino_dim);
        } else if (keyword == "patches") {
            want(patches);
        } else if (keyword == "frames") {
            want(frames);
        } else if (keyword == "record") {
            std::int64_t index = -1;
            std::string c_name, d_name;
            want(index);
            want(c_name);
            want(d_name);
            if (index != static_cast<std::int64_t>(records.size())) {
                throw frame::DataError(where + ": records must be dense and ordered");
            }
            records.emplace_back(c_name, d_name);
        } else {
            throw frame::DataError(where + ": unknown keyword '" + keyword + "'");
        }
    }
    if (version != 1) throw frame::DataError("features.txt: unsupported version");
    if (width != 4 && width != 8) throw frame::DataError("features.txt: width must be 4 or 8");
    if (clip_dim <= 0 || dino_dim <= 0 || patches <= 0 || frames < 0) {
        throw frame::DataError("features.txt: missing or invalid header fields");
    }
    if (static_cast<std::int64_t>(records.size()) != frames) {
        throw frame::DataError("features.txt: " + std::to_string(records.size()) +
                               " records for " + std::to_string(frames) + " frames");
    }

    const fs::path out_path = fs::path(rc.out) / "features.feat";
    frame::FeatureCacheWriter writer(out_path, clip_dim, dino_dim, patches, frames, width);
    for (const auto& [c_name, d_name] : records) {
        frame::TeacherTargets targets;
        targets.c_cls = frame::Tensor({1, clip_dim}, read_raw_reals(dir / c_name, clip_dim, width));
        targets.d_patch = frame::Tensor({patches, dino_dim},
                                        read_raw_reals(dir / d_name, patches * dino_dim, width));
        writer.append(targets);
    }
    writer.finish();
    std::cout << "import-features: " << frames << " frames into " << out_path.string() << "\n";
    return 0;
}

int run(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return 1;
    }
    const std::string command = argv[1];
    if (command == "--help" || command == "-h" || command == "help") {
        std::cout << kUsage;
        return 0;
    }
    static const std::set<std::string> known = {
        "gen-data",     "train-stage1", "train-stage2",  "eval-prop",     "eval-seg",
        "eval-zeroshot", "eval-regions", "drift-profile", "dump-features", "import-features"};
    if (!known.count(command)) {
        throw frame::ConfigError("unknown command '" + command + "' (see --help)");
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0) {
            throw frame::ConfigError("expected --key=value, got '" + arg + "'");
        }
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
            throw frame::ConfigError("expected --key=value, got '" + arg + "'");
        }
        pairs.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    }

    Resolved res = resolve(pairs);
    fs::create_directories(res.rc.out);
    frame::io::write_text_file(fs::path(res.rc.out) / "config.txt", res.rc.echo());

    if (command == "gen-data") return cmd_gen_data(res.rc);
    if (command == "train-stage1") return cmd_train(res.rc, res.ckpt, false);
    if (command == "train-stage2") return cmd_train(res.rc, res.ckpt, true);
    if (command == "eval-prop") return cmd_eval_prop(res.rc, res.ckpt);
    if (command == "eval-seg") return cmd_eval_seg(res.rc, res.ckpt);
    if (command == "eval-zeroshot") return cmd_eval_zeroshot(res.rc, res.ckpt);
    if (command == "eval-regions") return cmd_eval_regions(res.rc, res.ckpt);
    if (command == "drift-profile") return cmd_drift_profile(res.rc);
    if (command == "dump-features") return cmd_dump_features(res.rc);
    return cmd_import_features(res.rc);
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const frame::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const frame::ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 1;
    } catch (const frame::ContractError& e) {
        std::cerr << "contract error: " << e.what() << "\n";
        return 1;
    } catch (const frame::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const frame::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
