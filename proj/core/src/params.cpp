#include "frame/params.hpp"

namespace frame {

Tensor& ParamStore::create(const std::string& name, const Shape& shape) {
    auto [it, inserted] = params_.emplace(name, Tensor::zeros(shape));
    if (!inserted) {
        throw ContractError("parameter already registered: " + name);
    }
    it->second.set_requires_grad(true);
    return it->second;
}

Tensor& ParamStore::create_trunc_normal(const std::string& name, const Shape& shape, Rng& rng,
                                        double sigma) {
    Tensor& t = create(name, shape);
    Rng sub = rng.stream(name);
    auto& vals = t.ptr()->values;
    for (auto& v : vals) v = quantize(sub.truncated_normal(sigma));
    return t;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
}

bool ParamStore::contains(const std::string& name) const { return params_.count(name) > 0; }

void ParamStore::put(const std::string& name, Tensor t) {
    auto it = params_.find(name);
    if (it == params_.end()) {
        params_.emplace(name, std::move(t));
    } else {
        it->second = std::move(t);
    }
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [k, v] : params_) out.push_back(k);
    return out;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : params_) {
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
}

void ParamStore::set_requires_grad(bool v) {
    for (auto& [k, t] : params_) t.set_requires_grad(v);
}

void ParamStore::set_requires_grad_prefix(const std::string& prefix, bool v) {
    for (auto& [k, t] : params_) {
        if (k.rfind(prefix, 0) == 0) t.set_requires_grad(v);
    }
}

void ParamStore::zero_grad() {
    for (auto& [k, t] : params_) t.zero_grad();
}

} // namespace frame
