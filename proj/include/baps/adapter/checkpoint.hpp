#pragma once

// Checkpoint layout (little-endian):
//   bytes 0-3   magic "BAPW"
//   bytes 4-7   u32 format version (1)
//   bytes 8-15  u64 parameter count
//   then count x float32

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "baps/core/bytes.hpp"
#include "baps/core/error.hpp"
#include "baps/zoo/types.hpp"

namespace baps::adapter {

inline constexpr std::array<char, 4> kCheckpointMagic{'B', 'A', 'P', 'W'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 16;

inline std::vector<unsigned char> encode_checkpoint(const zoo::ParamVector& params) {
    std::vector<unsigned char> out;
    out.reserve(kCheckpointHeaderBytes + 4 * params.size());
    out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
    le::put_u32(out, kCheckpointVersion);
    le::put_u64(out, params.size());
    for (double v : params) le::put_f32(out, static_cast<float>(v));
    return out;
}

inline zoo::ParamVector decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kCheckpointHeaderBytes || std::memcmp(bytes.data(), kCheckpointMagic.data(), 4) != 0)
        throw DataError("not a checkpoint (bad magic)");
    if (le::get_u32(bytes.data() + 4) != kCheckpointVersion) throw DataError("unsupported checkpoint version");
    const std::uint64_t count = le::get_u64(bytes.data() + 8);
    if (bytes.size() != kCheckpointHeaderBytes + 4 * count) throw DataError("checkpoint size does not match its header");
    zoo::ParamVector params(count);
    for (std::uint64_t i = 0; i < count; ++i) params[i] = le::get_f32(bytes.data() + kCheckpointHeaderBytes + 4 * i);
    return params;
}

inline void save_checkpoint(const std::string& path, const zoo::ParamVector& params) {
    const auto bytes = encode_checkpoint(params);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

inline zoo::ParamVector load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

/// The float32 rounding applied by a save/load round trip.
inline zoo::ParamVector round_to_checkpoint_precision(zoo::ParamVector params) {
    for (auto& v : params) v = static_cast<double>(static_cast<float>(v));
    return params;
}

}  // namespace baps::adapter
