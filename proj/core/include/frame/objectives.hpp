#pragma once

#include <map>
#include <string>
#include <vector>

#include "frame/ops.hpp"
#include "frame/params.hpp"

namespace frame {

struct Stage1Weights {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
};

struct Stage2Weights {
    double alpha1 = 0.2; // current-frame semantic cosine
    double alpha2 = 0.1; // anticipated semantic cosine (t+4)
    double alpha3 = 2.0; // current-frame patch distance
    double alpha4 = 0.4; // anticipated patch distance (t+2)
};

// 1 - cos(a, b); errors if either vector has zero norm.
Tensor cosine_distance_loss(const Tensor& pred, const Tensor& target);

// Sum of squared per-patch differences divided by the patch count.
Tensor patch_mse(const Tensor& pred, const Tensor& target);

struct Stage1Components {
    Tensor semantic; // cosine distance of CLS prediction
    Tensor spatial;  // patch MSE
};

Stage1Components stage1_components(const Tensor& c_hat, const Tensor& c, const Tensor& d_hat,
                                   const Tensor& d);

Tensor stage1_loss(const Tensor& c_hat, const Tensor& c, const Tensor& d_hat, const Tensor& d,
                   const Stage1Weights& w = {});

struct Stage2Components {
    Tensor semantic_now;    // cosine distance at t
    Tensor semantic_future; // cosine distance at t+4
    Tensor spatial_now;     // patch MSE at t
    Tensor spatial_future;  // patch MSE at t+2
};

Stage2Components stage2_components(const Tensor& c_hat_t, const Tensor& c_t,
                                   const Tensor& c_hat_f, const Tensor& c_f,
                                   const Tensor& d_hat_t, const Tensor& d_t,
                                   const Tensor& d_hat_f, const Tensor& d_f);

Tensor stage2_loss(const Tensor& c_hat_t, const Tensor& c_t, const Tensor& c_hat_f,
                   const Tensor& c_f, const Tensor& d_hat_t, const Tensor& d_t,
                   const Tensor& d_hat_f, const Tensor& d_f, const Stage2Weights& w = {});

// Divides each component by an exponential running mean of its magnitude
// (decay 0.99). The first observation seeds the mean, so the first scaled
// value is exactly 1. The mean is treated as a constant: no gradient flows
// through it.
class MeanScaler {
public:
    explicit MeanScaler(double decay = 0.99, double eps = 1e-8);

    Tensor scale(const std::string& name, const Tensor& component);
    bool seeded(const std::string& name) const;
    double mean(const std::string& name) const;

private:
    double decay_;
    double eps_;
    std::map<std::string, double> means_;
};

struct ScheduleConfig {
    double base_lr = 1e-4;
    double weight_decay = 1e-4;
    std::int64_t warmup_steps = 100;
    std::int64_t restart_period = 1000;
    double min_lr = 1e-6;
    void validate() const;
};

// Linear ramp 0 -> base_lr over warmup_steps, then cosine base_lr -> min_lr
// over each restart_period, restarting from base_lr.
double lr_at(std::int64_t step, const ScheduleConfig& cfg);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with decoupled weight decay, applied uniformly to every parameter
// that requires grad. Moment state is keyed by parameter name.
class AdamW {
public:
    explicit AdamW(AdamConfig cfg = {});

    void step(ParamStore& ps, double lr, double weight_decay);
    std::int64_t steps() const { return t_; }

    // Moments as "opt.m.<name>" / "opt.v.<name>" plus "opt.t".
    void export_state(ParamStore& out) const;

private:
    AdamConfig cfg_;
    std::int64_t t_ = 0;
    std::map<std::string, std::vector<double>> m_;
    std::map<std::string, std::vector<double>> v_;
};

} // namespace frame
