#include "frame/memory.hpp"

#include <algorithm>
#include <cmath>

namespace frame {

MemoryBank::MemoryBank(std::int64_t capacity) : capacity_(capacity) {
    // Capacity 0 is the memoryless ablation: every push is discarded.
    if (capacity < 0) throw ConfigError("memory bank capacity must be >= 0");
}

void MemoryBank::push_projected(Tensor tokens, std::int64_t timestamp) {
    if (capacity_ == 0) return;
    if (!entries_.empty() && timestamp <= entries_.back().timestamp) {
        throw ContractError("memory push: timestamp " + std::to_string(timestamp) +
                            " not after " + std::to_string(entries_.back().timestamp));
    }
    if (!entries_.empty() && tokens.shape() != entries_.back().tokens.shape()) {
        throw ShapeError("memory push: token shape " + shape_str(tokens.shape()) +
                         " differs from stored " + shape_str(entries_.back().tokens.shape()));
    }
    entries_.push_back({std::move(tokens), timestamp});
    if (static_cast<std::int64_t>(entries_.size()) > capacity_) entries_.pop_front();
}

void MemoryBank::clear() { entries_.clear(); }

void init_memory(ParamStore& ps, const std::string& prefix, const MemoryConfig& cfg,
                 std::int64_t n_patches, Rng& rng) {
    const std::int64_t d = cfg.token_dim, dm = cfg.model_dim;
    if (cfg.heads <= 0 || d % cfg.heads != 0 || dm % cfg.heads != 0) {
        throw ConfigError("memory: widths " + std::to_string(d) + "/" + std::to_string(dm) +
                          " not divisible by " + std::to_string(cfg.heads) + " heads");
    }
    // Fan-in scale: the adapter trains from scratch behind a frozen encoder,
    // and at sigma=0.02 its cross-attention scores start first-order flat.
    const double sig = 1.0 / std::sqrt(static_cast<double>(d));
    nn::make_linear(ps, prefix + ".proj", dm, d, rng, 1.0 / std::sqrt(static_cast<double>(dm)));
    ps.create_trunc_normal(prefix + ".pe_spatial", {n_patches, d}, rng, sig);
    ps.create_trunc_normal(prefix + ".pe_temporal", {std::max<std::int64_t>(cfg.capacity, 1), d},
                           rng, sig);
    nn::make_linear(ps, prefix + ".consolidate", d, d, rng, sig);
    nn::make_attention(ps, prefix + ".cross", dm, d, d, dm, rng, sig);
    nn::make_block(ps, prefix + ".self", dm, cfg.heads, cfg.mlp_ratio, rng,
                   1.0 / std::sqrt(static_cast<double>(dm)));
}

void push(MemoryBank& bank, const Tensor& y_patch, std::int64_t timestamp, const ParamStore& ps,
          const std::string& prefix) {
    bank.push_projected(nn::apply_linear(ps, prefix + ".proj", y_patch), timestamp);
}

Tensor stamped_entry(const MemoryEntry& entry, std::int64_t query_timestamp, const ParamStore& ps,
                     const std::string& prefix, std::int64_t capacity) {
    const std::int64_t age = query_timestamp - entry.timestamp;
    if (age < 1 || age > capacity) {
        throw ContractError("memory entry age " + std::to_string(age) + " outside 1.." +
                            std::to_string(capacity));
    }
    const Tensor& spatial = ps.get(prefix + ".pe_spatial");
    if (spatial.rows() != entry.tokens.rows()) {
        throw ShapeError("memory entry " + shape_str(entry.tokens.shape()) +
                         " does not match spatial embedding " + shape_str(spatial.shape()));
    }
    const Tensor& temporal = ps.get(prefix + ".pe_temporal");
    Tensor age_row = ops::slice_rows(temporal, age - 1, 1);
    Tensor stamped = ops::add(entry.tokens, spatial);
    // Same age vector added to every token of the entry.
    std::vector<Tensor> rows(static_cast<std::size_t>(stamped.rows()), age_row);
    return ops::add(stamped, ops::concat_rows(rows));
}

Tensor memory_attend(const MemoryBank& bank, const EncoderOutput& current, const MemoryConfig& cfg,
                     const ParamStore& ps, const std::string& prefix) {
    const Tensor& q = current.y_patch;
    const Tensor& spatial = ps.get(prefix + ".pe_spatial");
    if (q.rows() != spatial.rows()) {
        throw ShapeError("memory attend: current tokens " + shape_str(q.shape()) +
                         " do not match spatial embedding " + shape_str(spatial.shape()));
    }

    Tensor current_kv = ops::add(nn::apply_linear(ps, prefix + ".proj", q), spatial);

    std::vector<Tensor> kv_parts;
    if (!bank.empty()) {
        std::vector<Tensor> stamped;
        stamped.reserve(bank.size());
        for (const auto& e : bank.entries()) {
            stamped.push_back(stamped_entry(e, current.timestamp, ps, prefix, bank.capacity()));
        }
        Tensor consolidated =
            nn::apply_linear(ps, prefix + ".consolidate", ops::concat_rows(stamped));
        kv_parts.push_back(consolidated);
    }
    kv_parts.push_back(current_kv);
    Tensor kv = kv_parts.size() == 1 ? kv_parts.front() : ops::concat_rows(kv_parts);

    Tensor cross = ops::multi_head_attention(q, kv, kv, cfg.heads,
                                             nn::attention_params(ps, prefix + ".cross"));
    Tensor fused = ops::add(q, cross);
    return nn::apply_block(ps, prefix + ".self", fused, cfg.heads);
}

} // namespace frame
