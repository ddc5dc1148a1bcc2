#pragma once

#include <map>
#include <string>
#include <vector>

#include "frame/rng.hpp"
#include "frame/tensor.hpp"

namespace frame {

// Named parameter container. Names are hierarchical dot-separated paths
// ("enc.block0.attn.wq"); iteration order is lexicographic, which fixes
// serialization order.
class ParamStore {
public:
    // Registers a zero tensor under `name`; errors if the name exists.
    Tensor& create(const std::string& name, const Shape& shape);

    // Registers and fills with truncated normal (sigma, cut at 2 sigma)
    // from the store rng stream named by the parameter path.
    Tensor& create_trunc_normal(const std::string& name, const Shape& shape, Rng& rng,
                                double sigma = 0.02);

    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    // Inserts or replaces; used when loading checkpoints.
    void put(const std::string& name, Tensor t);

    std::vector<std::string> names() const;
    std::vector<std::string> names_with_prefix(const std::string& prefix) const;

    void set_requires_grad(bool v);
    void set_requires_grad_prefix(const std::string& prefix, bool v);
    void zero_grad();

    std::size_t size() const { return params_.size(); }

    std::map<std::string, Tensor>& raw() { return params_; }
    const std::map<std::string, Tensor>& raw() const { return params_; }

private:
    std::map<std::string, Tensor> params_;
};

} // namespace frame
