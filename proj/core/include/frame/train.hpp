#pragma once

#include <functional>

#include "frame/model.hpp"

namespace frame {

struct TrainLogRow {
    std::int64_t step = 0;
    double lr = 0.0;
    double loss = 0.0; // raw objective value, before mean scaling
    std::vector<double> components; // raw component values in loss order
};

struct TrainResult {
    double initial_loss = 0.0; // raw loss at step 0
    double final_loss = 0.0;   // mean raw loss over the last 5% of steps
    std::int64_t steps = 0;
};

using TrainLogFn = std::function<void(const TrainLogRow&)>;

// Copies model parameters (everything except optimizer state under "opt.")
// from a loaded checkpoint into a live store.
void adopt_model_params(ParamStore& dst, const ParamStore& src);

// Trains encoder + current-frame heads on per-frame teacher targets.
TrainResult train_stage1(ParamStore& ps, const ModelConfig& cfg, const std::vector<Clip>& clips,
                         TeacherSource& teacher, const TrainLogFn& log = {});

// Freezes "enc." and trains memory + all four heads on anticipation windows.
TrainResult train_stage2(ParamStore& ps, const ModelConfig& cfg, const std::vector<Clip>& clips,
                         TeacherSource& teacher, const TrainLogFn& log = {});

} // namespace frame
