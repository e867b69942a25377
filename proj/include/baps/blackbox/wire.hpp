#pragma once

// Framing for the out-of-process oracle. Every message is a u32 payload
// length followed by the payload; all integers and floats little-endian.
//
//   request  payload: u32 H, u32 W, u32 C, u32 x, u32 y, H*W*C float32 (HWC)
//   response payload: u32 status; status 0 -> u32 H, u32 W, H*W float32
//                                 otherwise -> UTF-8 error message

#include <cerrno>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "baps/adapter/image.hpp"
#include "baps/core/bytes.hpp"
#include "baps/core/error.hpp"
#include "baps/metrics/masks.hpp"

namespace baps::blackbox::wire {

using Bytes = std::vector<unsigned char>;

inline constexpr std::uint32_t kMaxPayload = 64u << 20;

inline Bytes encode_request(const Image& img, const PointPrompt& p) {
    Bytes out;
    out.reserve(20 + 4 * img.values.size());
    le::put_u32(out, static_cast<std::uint32_t>(img.height));
    le::put_u32(out, static_cast<std::uint32_t>(img.width));
    le::put_u32(out, static_cast<std::uint32_t>(img.channels));
    le::put_u32(out, static_cast<std::uint32_t>(p.x));
    le::put_u32(out, static_cast<std::uint32_t>(p.y));
    for (float v : img.values) le::put_f32(out, v);
    return out;
}

inline std::pair<Image, PointPrompt> decode_request(const Bytes& payload) {
    if (payload.size() < 20) throw DataError("request too short");
    const auto h = le::get_u32(payload.data());
    const auto w = le::get_u32(payload.data() + 4);
    const auto c = le::get_u32(payload.data() + 8);
    if (h == 0 || w == 0 || h > 8192 || w > 8192 || (c != 1 && c != 3)) throw DataError("request has a bad image shape");
    const std::size_t n = static_cast<std::size_t>(h) * w * c;
    if (payload.size() != 20 + 4 * n) throw DataError("request size does not match its image shape");
    Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (std::size_t i = 0; i < n; ++i) img.values[i] = le::get_f32(payload.data() + 20 + 4 * i);
    PointPrompt p{static_cast<int>(le::get_u32(payload.data() + 12)),
                  static_cast<int>(le::get_u32(payload.data() + 16))};
    return {std::move(img), p};
}

inline Bytes encode_response(const SoftMask& mask) {
    Bytes out;
    out.reserve(12 + 4 * mask.size());
    le::put_u32(out, 0);
    le::put_u32(out, static_cast<std::uint32_t>(mask.height));
    le::put_u32(out, static_cast<std::uint32_t>(mask.width));
    for (float v : mask.values) le::put_f32(out, v);
    return out;
}

inline Bytes encode_error(const std::string& message) {
    Bytes out;
    le::put_u32(out, 1);
    out.insert(out.end(), message.begin(), message.end());
    return out;
}

inline SoftMask decode_response(const Bytes& payload) {
    if (payload.size() < 4) throw OracleError("blackbox response too short");
    if (le::get_u32(payload.data()) != 0)
        throw OracleError("blackbox error: " + std::string(payload.begin() + 4, payload.end()));
    if (payload.size() < 12) throw OracleError("blackbox response too short");
    const auto h = le::get_u32(payload.data() + 4);
    const auto w = le::get_u32(payload.data() + 8);
    if (h == 0 || w == 0 || payload.size() != 12 + 4 * static_cast<std::size_t>(h) * w)
        throw OracleError("blackbox response size does not match its mask shape");
    SoftMask mask(static_cast<int>(h), static_cast<int>(w));
    for (std::size_t i = 0; i < mask.size(); ++i) mask.values[i] = le::get_f32(payload.data() + 12 + 4 * i);
    return mask;
}

inline bool write_all(int fd, const unsigned char* data, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::write(fd, data, n);
        if (k < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data += k;
        n -= static_cast<std::size_t>(k);
    }
    return true;
}

/// Returns false on clean EOF before the first byte; throws on a torn read.
inline bool read_all(int fd, unsigned char* data, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t k = ::read(fd, data + got, n - got);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw OracleError("pipe read failed");
        }
        if (k == 0) {
            if (got == 0) return false;
            throw OracleError("pipe closed mid-message");
        }
        got += static_cast<std::size_t>(k);
    }
    return true;
}

inline void write_frame(int fd, const Bytes& payload) {
    Bytes len;
    le::put_u32(len, static_cast<std::uint32_t>(payload.size()));
    if (!write_all(fd, len.data(), len.size()) || !write_all(fd, payload.data(), payload.size()))
        throw OracleError("pipe write failed");
}

/// nullopt on clean EOF.
inline std::optional<Bytes> read_frame(int fd) {
    unsigned char len[4];
    if (!read_all(fd, len, 4)) return std::nullopt;
    const auto n = le::get_u32(len);
    if (n > kMaxPayload) throw OracleError("frame too large");
    Bytes payload(n);
    if (n > 0 && !read_all(fd, payload.data(), n)) throw OracleError("pipe closed mid-message");
    return payload;
}

}  // namespace baps::blackbox::wire
