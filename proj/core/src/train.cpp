#include "frame/train.hpp"

#include <cmath>
#include <map>

namespace frame {

namespace {

void check_finite(double v, std::int64_t step) {
    if (!std::isfinite(v)) {
        throw NumericError("non-finite loss at step " + std::to_string(step));
    }
}

class TargetCache {
public:
    TargetCache(const std::vector<Clip>& clips, TeacherSource& teacher)
        : clips_(clips), teacher_(teacher) {}

    // frame is 0-based within the clip
    const TeacherTargets& get(std::size_t clip, std::int64_t frame) {
        const auto key = std::make_pair(clip, frame);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            it = cache_.emplace(key, teacher_.extract(clips_[clip].frames[static_cast<std::size_t>(frame)], frame)).first;
        }
        return it->second;
    }

private:
    const std::vector<Clip>& clips_;
    TeacherSource& teacher_;
    std::map<std::pair<std::size_t, std::int64_t>, TeacherTargets> cache_;
};

double final_window_mean(const std::vector<double>& losses) {
    const auto n = static_cast<std::int64_t>(losses.size());
    const std::int64_t window = std::max<std::int64_t>(1, n / 20);
    double acc = 0.0;
    for (std::int64_t i = n - window; i < n; ++i) acc += losses[static_cast<std::size_t>(i)];
    return acc / static_cast<double>(window);
}

} // namespace

void adopt_model_params(ParamStore& dst, const ParamStore& src) {
    for (const auto& [name, t] : src.raw()) {
        if (name.rfind("opt.", 0) == 0) continue;
        dst.put(name, t.clone());
    }
}

TrainResult train_stage1(ParamStore& ps, const ModelConfig& cfg, const std::vector<Clip>& clips,
                         TeacherSource& teacher, const TrainLogFn& log) {
    if (clips.empty()) throw DataError("stage 1: no training clips");
    ps.set_requires_grad(true);

    Rng order = Rng(cfg.seed).stream("stage1.order");
    TargetCache targets(clips, teacher);
    MeanScaler scaler(cfg.scale_decay);
    AdamW opt;
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(cfg.steps));

    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        const auto ci = static_cast<std::size_t>(
            order.uniform_int(0, static_cast<std::int64_t>(clips.size()) - 1));
        const auto frame_count = static_cast<std::int64_t>(clips[ci].frames.size());
        const std::int64_t fi = order.uniform_int(0, frame_count - 1);

        Stage1Out fwd = stage1_forward(ps, cfg, clips[ci].frames[static_cast<std::size_t>(fi)], fi + 1);
        const TeacherTargets& tgt = targets.get(ci, fi);
        Stage1Components parts = stage1_components(fwd.c_hat, tgt.c_cls, fwd.d_hat, tgt.d_patch);

        const double raw_sem = parts.semantic.item();
        const double raw_spa = parts.spatial.item();
        const double raw = cfg.w1.lambda1 * raw_sem + cfg.w1.lambda2 * raw_spa;
        check_finite(raw, step);
        losses.push_back(raw);

        Tensor sem = cfg.mean_scaling ? scaler.scale("stage1.semantic", parts.semantic)
                                      : parts.semantic;
        Tensor spa = cfg.mean_scaling ? scaler.scale("stage1.spatial", parts.spatial)
                                      : parts.spatial;
        Tensor objective = ops::add(ops::scale(sem, cfg.w1.lambda1), ops::scale(spa, cfg.w1.lambda2));

        const double lr = lr_at(step, cfg.sched);
        ps.zero_grad();
        backward(objective);
        opt.step(ps, lr, cfg.sched.weight_decay);

        if (log) log({step, lr, raw, {raw_sem, raw_spa}});
    }

    TrainResult res;
    res.initial_loss = losses.front();
    res.final_loss = final_window_mean(losses);
    res.steps = cfg.steps;
    return res;
}

TrainResult train_stage2(ParamStore& ps, const ModelConfig& cfg, const std::vector<Clip>& clips,
                         TeacherSource& teacher, const TrainLogFn& log) {
    if (clips.empty()) throw DataError("stage 2: no training clips");
    ps.set_requires_grad(true);
    ps.set_requires_grad_prefix("enc.", false);

    const std::int64_t horizon = std::max(cfg.spatial_delta, cfg.semantic_delta);
    Rng order = Rng(cfg.seed).stream("stage2.order");
    TargetCache targets(clips, teacher);
    MeanScaler scaler(cfg.scale_decay);
    AdamW opt;
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(cfg.steps));

    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        const auto ci = static_cast<std::size_t>(
            order.uniform_int(0, static_cast<std::int64_t>(clips.size()) - 1));
        const Clip& clip = clips[ci];
        const auto frame_count = static_cast<std::int64_t>(clip.frames.size());
        const std::int64_t t_max = frame_count - horizon;
        if (t_max < 1) {
            throw DataError("stage 2: clip of " + std::to_string(frame_count) +
                            " frames too short for anticipation horizon " +
                            std::to_string(horizon));
        }
        const std::int64_t t = order.uniform_int(1, t_max);
        const WindowPlan window =
            build_window(frame_count, t, cfg.mem.capacity, cfg.spatial_delta, cfg.semantic_delta);

        MemoryBank bank(cfg.mem.capacity);
        for (std::int64_t p : window.past) {
            EncoderOutput past;
            {
                NoGradScope ng; // encoder frozen; its forward needs no tape
                past = encode(clip.frames[static_cast<std::size_t>(p - 1)], cfg.enc, ps, "enc", p);
            }
            // The projection trains, so the push itself is recorded.
            push(bank, past.y_patch, p, ps, "mem");
        }
        EncoderOutput current;
        {
            NoGradScope ng;
            current = encode(clip.frames[static_cast<std::size_t>(t - 1)], cfg.enc, ps, "enc", t);
        }

        Stage2Out fwd = stage2_forward(ps, cfg, bank, current);
        const TeacherTargets& tgt_now = targets.get(ci, t - 1);
        const TeacherTargets& tgt_spa = targets.get(ci, window.spatial_target - 1);
        const TeacherTargets& tgt_sem = targets.get(ci, window.semantic_target - 1);

        Stage2Components parts =
            stage2_components(fwd.c_hat_now, tgt_now.c_cls, fwd.c_hat_future, tgt_sem.c_cls,
                              fwd.d_hat_now, tgt_now.d_patch, fwd.d_hat_future, tgt_spa.d_patch);

        const double raw_sem_now = parts.semantic_now.item();
        const double raw_sem_fut = parts.semantic_future.item();
        const double raw_spa_now = parts.spatial_now.item();
        const double raw_spa_fut = parts.spatial_future.item();
        const double raw = cfg.w2.alpha1 * raw_sem_now + cfg.w2.alpha2 * raw_sem_fut +
                           cfg.w2.alpha3 * raw_spa_now + cfg.w2.alpha4 * raw_spa_fut;
        check_finite(raw, step);
        losses.push_back(raw);

        Tensor c1 = cfg.mean_scaling ? scaler.scale("stage2.semantic_now", parts.semantic_now)
                                     : parts.semantic_now;
        Tensor c2 = cfg.mean_scaling ? scaler.scale("stage2.semantic_future", parts.semantic_future)
                                     : parts.semantic_future;
        Tensor c3 = cfg.mean_scaling ? scaler.scale("stage2.spatial_now", parts.spatial_now)
                                     : parts.spatial_now;
        Tensor c4 = cfg.mean_scaling ? scaler.scale("stage2.spatial_future", parts.spatial_future)
                                     : parts.spatial_future;
        Tensor objective = ops::add(ops::add(ops::scale(c1, cfg.w2.alpha1), ops::scale(c2, cfg.w2.alpha2)),
                                    ops::add(ops::scale(c3, cfg.w2.alpha3), ops::scale(c4, cfg.w2.alpha4)));

        const double lr = lr_at(step, cfg.sched);
        ps.zero_grad();
        backward(objective);
        opt.step(ps, lr, cfg.sched.weight_decay);

        if (log) log({step, lr, raw, {raw_sem_now, raw_sem_fut, raw_spa_now, raw_spa_fut}});
    }

    TrainResult res;
    res.initial_loss = losses.front();
    res.final_loss = final_window_mean(losses);
    res.steps = cfg.steps;
    return res;
}

} // namespace frame
