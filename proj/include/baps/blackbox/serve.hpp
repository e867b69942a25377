#pragma once

#include <cstdint>

#include "baps/blackbox/region_grower.hpp"
#include "baps/blackbox/wire.hpp"

namespace baps::blackbox {

/// Answers framed segment requests from in_fd on out_fd until EOF. Bad
/// requests get an error response and the loop continues. Returns the number
/// of requests served.
inline std::uint64_t serve(int in_fd, int out_fd, const GrowerParams& params) {
    auto oracle = make_oracle(params);
    std::uint64_t served = 0;
    while (auto frame = wire::read_frame(in_fd)) {
        wire::Bytes reply;
        try {
            auto [img, point] = wire::decode_request(*frame);
            reply = wire::encode_response(oracle->segment(img, point));
        } catch (const Error& e) {
            reply = wire::encode_error(e.what());
        }
        wire::write_frame(out_fd, reply);
        ++served;
    }
    return served;
}

}  // namespace baps::blackbox
