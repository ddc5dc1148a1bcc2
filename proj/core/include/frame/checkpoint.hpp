#pragma once

#include <filesystem>
#include <string>

#include "frame/params.hpp"

namespace frame {

// Checkpoint layout (all integers little-endian):
//   magic "FRAMEckp" (8 bytes)
//   u32 version (currently 1)
//   u8  scalar width: 4 or 8 bytes per real
//   u32 config text length + bytes (opaque key=value text, may be empty)
//   u64 tensor count
//   per tensor, in lexicographic name order:
//     u32 name length + bytes
//     u32 ndim, then ndim x u64 dims
//     raw reals, row-major
// Round-trips are bit-exact at matching scalar width.
struct Checkpoint {
    std::string config_text;
    ParamStore params;
};

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const std::string& config_text, int scalar_width = 8);

Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace frame
