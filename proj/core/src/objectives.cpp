#include "frame/objectives.hpp"

#include <cmath>

namespace frame {

namespace {

double l2_norm(const Tensor& t) {
    double acc = 0.0;
    for (double v : t.values()) acc += v * v;
    return std::sqrt(acc);
}

void check_target(const char* what, const Tensor& target) {
    if (target.requires_grad()) {
        throw ContractError(std::string(what) + ": target must be detached");
    }
}

} // namespace

Tensor cosine_distance_loss(const Tensor& pred, const Tensor& target) {
    if (!same_shape(pred.shape(), target.shape())) {
        throw ShapeError("cosine loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(target.shape()));
    }
    if (l2_norm(pred) == 0.0 || l2_norm(target) == 0.0) {
        throw DataError("cosine loss: zero-norm vector");
    }
    Tensor cos = ops::cosine_similarity(pred, target);
    return ops::add_scalar(ops::scale(cos, -1.0), 1.0);
}

Tensor patch_mse(const Tensor& pred, const Tensor& target) {
    if (!same_shape(pred.shape(), target.shape())) {
        throw ShapeError("patch mse: shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(target.shape()));
    }
    Tensor diff = ops::sub(pred, target);
    const double inv_n = 1.0 / static_cast<double>(pred.rows());
    return ops::scale(ops::sum(ops::mul(diff, diff)), inv_n);
}

Stage1Components stage1_components(const Tensor& c_hat, const Tensor& c, const Tensor& d_hat,
                                   const Tensor& d) {
    check_target("stage1 loss", c);
    check_target("stage1 loss", d);
    return {cosine_distance_loss(c_hat, c), patch_mse(d_hat, d)};
}

Tensor stage1_loss(const Tensor& c_hat, const Tensor& c, const Tensor& d_hat, const Tensor& d,
                   const Stage1Weights& w) {
    auto parts = stage1_components(c_hat, c, d_hat, d);
    return ops::add(ops::scale(parts.semantic, w.lambda1), ops::scale(parts.spatial, w.lambda2));
}

Stage2Components stage2_components(const Tensor& c_hat_t, const Tensor& c_t,
                                   const Tensor& c_hat_f, const Tensor& c_f,
                                   const Tensor& d_hat_t, const Tensor& d_t,
                                   const Tensor& d_hat_f, const Tensor& d_f) {
    check_target("stage2 loss", c_t);
    check_target("stage2 loss", c_f);
    check_target("stage2 loss", d_t);
    check_target("stage2 loss", d_f);
    return {cosine_distance_loss(c_hat_t, c_t), cosine_distance_loss(c_hat_f, c_f),
            patch_mse(d_hat_t, d_t), patch_mse(d_hat_f, d_f)};
}

Tensor stage2_loss(const Tensor& c_hat_t, const Tensor& c_t, const Tensor& c_hat_f,
                   const Tensor& c_f, const Tensor& d_hat_t, const Tensor& d_t,
                   const Tensor& d_hat_f, const Tensor& d_f, const Stage2Weights& w) {
    auto parts = stage2_components(c_hat_t, c_t, c_hat_f, c_f, d_hat_t, d_t, d_hat_f, d_f);
    Tensor sem = ops::add(ops::scale(parts.semantic_now, w.alpha1),
                          ops::scale(parts.semantic_future, w.alpha2));
    Tensor spa = ops::add(ops::scale(parts.spatial_now, w.alpha3),
                          ops::scale(parts.spatial_future, w.alpha4));
    return ops::add(sem, spa);
}

MeanScaler::MeanScaler(double decay, double eps) : decay_(decay), eps_(eps) {}

Tensor MeanScaler::scale(const std::string& name, const Tensor& component) {
    if (component.numel() != 1) {
        throw ShapeError("mean scaling: component must be scalar, got " +
                         shape_str(component.shape()));
    }
    const double raw = std::abs(component.item());
    auto it = means_.find(name);
    if (it == means_.end()) {
        it = means_.emplace(name, raw).first;
    } else {
        it->second = decay_ * it->second + (1.0 - decay_) * raw;
    }
    return ops::scale(component, 1.0 / (it->second + eps_));
}

bool MeanScaler::seeded(const std::string& name) const { return means_.count(name) > 0; }

double MeanScaler::mean(const std::string& name) const {
    auto it = means_.find(name);
    if (it == means_.end()) throw ContractError("mean scaling: unseeded component " + name);
    return it->second;
}

void ScheduleConfig::validate() const {
    if (warmup_steps < 0) throw ConfigError("schedule: negative warmup");
    if (restart_period <= 0) throw ConfigError("schedule: restart period must be positive");
    if (base_lr < 0 || min_lr < 0 || weight_decay < 0) {
        throw ConfigError("schedule: negative rate");
    }
}

double lr_at(std::int64_t step, const ScheduleConfig& cfg) {
    cfg.validate();
    if (step < 0) throw ContractError("schedule: negative step");
    if (step < cfg.warmup_steps) {
        return cfg.base_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    }
    const std::int64_t phase = (step - cfg.warmup_steps) % cfg.restart_period;
    const double frac = static_cast<double>(phase) / static_cast<double>(cfg.restart_period);
    constexpr double pi = 3.14159265358979323846;
    return cfg.min_lr + 0.5 * (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(pi * frac));
}

AdamW::AdamW(AdamConfig cfg) : cfg_(cfg) {}

void AdamW::step(ParamStore& ps, double lr, double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const Precision prec = precision();

    for (auto& [name, tensor] : ps.raw()) {
        if (!tensor.requires_grad()) continue;
        auto data = tensor.ptr();
        const std::size_t n = data->values.size();
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.size() != n) m.assign(n, 0.0);
        if (v.size() != n) v.assign(n, 0.0);
        const bool has_grad = !data->grad.empty();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = has_grad ? data->grad[i] : 0.0;
            m[i] = quantize(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g, prec);
            v[i] = quantize(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g, prec);
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            double p = data->values[i];
            p -= lr * weight_decay * p;
            p -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            data->values[i] = quantize(p, prec);
        }
    }
}

void AdamW::export_state(ParamStore& out) const {
    Tensor t = Tensor::scalar(static_cast<double>(t_));
    out.put("opt.t", std::move(t));
    for (const auto& [name, m] : m_) {
        Tensor tm = Tensor::zeros({static_cast<std::int64_t>(m.size())});
        tm.ptr()->values = m;
        out.put("opt.m." + name, std::move(tm));
    }
    for (const auto& [name, v] : v_) {
        Tensor tv = Tensor::zeros({static_cast<std::int64_t>(v.size())});
        tv.ptr()->values = v;
        out.put("opt.v." + name, std::move(tv));
    }
}

} // namespace frame
