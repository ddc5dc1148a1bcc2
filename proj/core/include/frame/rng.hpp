#pragma once

#include <cstdint>
#include <string>

namespace frame {

// xoshiro256++ with splitmix64 seeding. Stream splitting is by name: each
// parameter tensor (or sampling purpose) derives its own independent stream
// as stream(master_seed, name), so initialization is reproducible and
// insensitive to the order in which modules are constructed.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Derives the substream for `name` from this generator's seed without
    // disturbing this generator's state.
    Rng stream(const std::string& name) const;

    std::uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi); // [lo, hi] inclusive
    double normal();                       // standard normal, Box-Muller
    double truncated_normal(double sigma); // N(0, sigma^2) clipped to +/- 2 sigma

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a64(const std::string& s);
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace frame
