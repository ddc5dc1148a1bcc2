#pragma once

#include <deque>
#include <string>

#include "frame/vit.hpp"

namespace frame {

struct MemoryConfig {
    std::int64_t capacity = 5;  // frames kept, FIFO
    std::int64_t token_dim = 64; // bottleneck width d
    std::int64_t model_dim = 64; // encoder width D
    int heads = 4;
    double mlp_ratio = 4.0;
};

struct MemoryEntry {
    Tensor tokens; // [N x d], projected, without positional stamping
    std::int64_t timestamp = 0;
};

// FIFO of the most recent `capacity` frames. Entries hold the raw projected
// tokens; spatial and age embeddings are added when the bank is read, so an
// entry's temporal stamp always reflects its age relative to the query frame.
class MemoryBank {
public:
    explicit MemoryBank(std::int64_t capacity);

    void push_projected(Tensor tokens, std::int64_t timestamp);
    void clear();

    std::int64_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::deque<MemoryEntry>& entries() const { return entries_; }

private:
    std::int64_t capacity_;
    std::deque<MemoryEntry> entries_;
};

// Registers memory parameters under `prefix`:
//   proj.{w,b}  pe_spatial  pe_temporal  consolidate.{w,b}  cross.* self.*
void init_memory(ParamStore& ps, const std::string& prefix, const MemoryConfig& cfg,
                 std::int64_t n_patches, Rng& rng);

// Projects encoder patch tokens D -> d and appends them to the bank.
void push(MemoryBank& bank, const Tensor& y_patch, std::int64_t timestamp, const ParamStore& ps,
          const std::string& prefix);

// Entry tokens + spatial grid embedding + age embedding, age measured from
// `query_timestamp` (1 = previous frame). Age must lie in 1..capacity.
Tensor stamped_entry(const MemoryEntry& entry, std::int64_t query_timestamp, const ParamStore& ps,
                     const std::string& prefix, std::int64_t capacity);

// Cross-attention from current patch tokens over {consolidated memory,
// current tokens} followed by one self-attention block; returns [N x D].
Tensor memory_attend(const MemoryBank& bank, const EncoderOutput& current, const MemoryConfig& cfg,
                     const ParamStore& ps, const std::string& prefix);

} // namespace frame
