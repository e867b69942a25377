#include <gtest/gtest.h>

#include <thread>
#include <vector>

#include <unistd.h>

#include "baps/blackbox/region_grower.hpp"
#include "baps/blackbox/serve.hpp"
#include "baps/blackbox/subprocess.hpp"
#include "baps/blackbox/wire.hpp"
#include "baps/core/random.hpp"

using namespace baps;
using namespace baps::blackbox;

namespace {

Image disc_fixture() {
    Image img(16, 16, 1, 0.0f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if ((x - 7) * (x - 7) + (y - 8) * (y - 8) <= 16) img.at(y, x, 0) = 1.0f;
    return img;
}

Image random_image(int h, int w, int c, std::uint64_t seed) {
    RngStream rng(seed);
    Image img(h, w, c);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform());
    return img;
}

// Iterate "add every in-tolerance neighbour of the mask" to a fixed point.
BinaryMask brute_flood(const Grid<double>& value, PointPrompt seed, double tau, int connectivity) {
    BinaryMask m(value.height, value.width);
    m.at(seed.y, seed.x) = 1;
    const double v = value.at(seed.y, seed.x);
    bool grew = true;
    while (grew) {
        grew = false;
        for (int y = 0; y < value.height; ++y)
            for (int x = 0; x < value.width; ++x) {
                if (m.at(y, x) || std::abs(value.at(y, x) - v) > tau) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && nx < value.width && ny >= 0 && ny < value.height && m.at(ny, nx) && !m.at(y, x)) {
                            m.at(y, x) = 1;
                            grew = true;
                        }
                    }
            }
    }
    return m;
}

BinaryMask support(const SoftMask& s) {
    BinaryMask m(s.height, s.width);
    for (std::size_t i = 0; i < s.size(); ++i) m.values[i] = s.values[i] > 0.0f;
    return m;
}

}  // namespace

TEST(Segment, ConstantImageIsAllOnes) {
    for (double tau : {0.01, 0.15, 0.9}) {
        const auto m = segment(Image(12, 12, 3, 0.37f), {3, 4}, {tau, 1.0, 4});
        for (float v : m.values) EXPECT_EQ(v, 1.0f);
    }
}

TEST(Segment, DiscFixture) {
    const auto img = disc_fixture();
    const GrowerParams params{0.5, 0.0, 4};
    const auto hard = grow_region(blurred_intensity(img, 0.0), {7, 8}, 0.5, 4);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) EXPECT_EQ(hard.at(y, x), img.at(y, x, 0) > 0.5f ? 1 : 0);
    // With a binary image the soft values inside the component are all 1.
    EXPECT_EQ(support(segment(img, {7, 8}, params)), hard);

    const auto bg = segment(img, {0, 0}, params);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) EXPECT_EQ(bg.at(y, x) > 0.0f, img.at(y, x, 0) == 0.0f);
}

TEST(Segment, FloodFillMatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto img = random_image(16, 16, seed % 2 ? 3 : 1, seed);
        const double sigma = seed % 3 == 0 ? 0.0 : 1.0;
        const int conn = seed % 4 < 2 ? 4 : 8;
        const PointPrompt p{static_cast<int>(seed % 16), static_cast<int>((seed * 7) % 16)};
        const auto value = blurred_intensity(img, sigma);
        const auto want = brute_flood(value, p, 0.2, conn);
        EXPECT_EQ(grow_region(value, p, 0.2, conn), want) << seed;
        const auto soft = segment(img, p, {0.2, sigma, conn});
        for (std::size_t i = 0; i < soft.size(); ++i) {
            if (!want.values[i]) {
                EXPECT_EQ(soft.values[i], 0.0f);
            }
            EXPECT_GE(soft.values[i], 0.0f);
            EXPECT_LE(soft.values[i], 1.0f);
        }
    }
}

TEST(Segment, SeedPixelIsOne) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto img = random_image(20, 24, 3, seed);
        const PointPrompt p{static_cast<int>(seed * 2), static_cast<int>(seed)};
        EXPECT_EQ(segment(img, p, {}).at(p.y, p.x), 1.0f);
    }
}

TEST(Segment, MonotoneInTau) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto value = blurred_intensity(random_image(16, 16, 1, 100 + seed), 0.0);
        const PointPrompt p{8, 8};
        BinaryMask prev = grow_region(value, p, 0.05, 4);
        for (double tau : {0.1, 0.2, 0.3, 0.5, 0.8}) {
            const auto next = grow_region(value, p, tau, 4);
            for (std::size_t i = 0; i < next.size(); ++i)
                if (prev.values[i]) {
                    EXPECT_TRUE(next.values[i]);
                }
            prev = next;
        }
    }
}

TEST(Segment, InvalidInputs) {
    const Image img(8, 8, 1, 0.5f);
    EXPECT_THROW(segment(img, {8, 0}, {}), ConfigError);
    EXPECT_THROW(segment(img, {0, 0}, {0.0, 1.0, 4}), ConfigError);
    EXPECT_THROW(segment(img, {0, 0}, {1.0, 1.0, 4}), ConfigError);
    EXPECT_THROW(segment(img, {0, 0}, {0.1, -1.0, 4}), ConfigError);
    EXPECT_THROW(segment(img, {0, 0}, {0.1, 1.0, 6}), ConfigError);
}

TEST(BlurredIntensity, ChannelMeanAndFlatInvariance) {
    Image img(4, 4, 3);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            img.at(y, x, 0) = 0.0f;
            img.at(y, x, 1) = 0.3f;
            img.at(y, x, 2) = 0.6f;
        }
    for (double sigma : {0.0, 1.0, 2.5}) {
        const auto g = blurred_intensity(img, sigma);
        for (double v : g.values) EXPECT_NEAR(v, 0.3, 1e-7);
    }
}

TEST(Oracle, DeterministicAndCounted) {
    auto a = make_oracle({});
    auto b = make_oracle({});
    const auto img = random_image(16, 16, 3, 1);
    EXPECT_EQ(a->call_count(), 0u);
    EXPECT_EQ(a->segment(img, {3, 3}), b->segment(img, {3, 3}));
    EXPECT_EQ(a->segment(img, {3, 3}), segment(img, {3, 3}, {}));
    EXPECT_EQ(a->call_count(), 2u);
    EXPECT_EQ(b->call_count(), 1u);
}

TEST(Oracle, InvalidParamsRejectedAtConstruction) {
    EXPECT_THROW(make_oracle({2.0, 1.0, 4}), ConfigError);
}

TEST(Wire, RequestAndResponseRoundTrip) {
    const auto img = random_image(5, 7, 3, 2);
    const auto [back, p] = wire::decode_request(wire::encode_request(img, {4, 2}));
    EXPECT_EQ(back, img);
    EXPECT_EQ(p, (PointPrompt{4, 2}));
    const auto mask = segment(img, {4, 2}, {});
    EXPECT_EQ(wire::decode_response(wire::encode_response(mask)), mask);
}

TEST(Wire, ErrorsSurfaceAsOracleErrors) {
    EXPECT_THROW(wire::decode_response(wire::encode_error("nope")), OracleError);
    EXPECT_THROW(wire::decode_response({0, 0}), OracleError);
    auto req = wire::encode_request(Image(2, 2, 1), {0, 0});
    req.pop_back();
    EXPECT_THROW(wire::decode_request(req), DataError);
}

TEST(Serve, AnswersFramesUntilEof) {
    int to_server[2], from_server[2];
    ASSERT_EQ(::pipe(to_server), 0);
    ASSERT_EQ(::pipe(from_server), 0);
    std::uint64_t served = 0;
    std::thread server([&] {
        served = serve(to_server[0], from_server[1], {});
        ::close(from_server[1]);
    });
    const auto img = random_image(10, 10, 1, 3);
    wire::write_frame(to_server[1], wire::encode_request(img, {2, 2}));
    const auto reply = wire::read_frame(from_server[0]);
    ASSERT_TRUE(reply);
    EXPECT_EQ(wire::decode_response(*reply), segment(img, {2, 2}, {}));

    // A point outside the image gets an error reply, and serving continues.
    wire::write_frame(to_server[1], wire::encode_request(img, {20, 2}));
    const auto err = wire::read_frame(from_server[0]);
    ASSERT_TRUE(err);
    EXPECT_THROW(wire::decode_response(*err), OracleError);

    ::close(to_server[1]);
    server.join();
    EXPECT_EQ(served, 2u);
    EXPECT_FALSE(wire::read_frame(from_server[0]));
    ::close(to_server[0]);
    ::close(from_server[0]);
}

TEST(SubprocessOracle, BitIdenticalToInProcess) {
    SubprocessOracle remote({BAPS_CLI_PATH, "blackbox-serve", "--tau", "0.15", "--sigma", "1", "--connectivity", "4"});
    auto local = make_oracle({0.15, 1.0, 4});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto img = random_image(64, 64, 3, seed);
        const PointPrompt p{static_cast<int>(seed * 6), static_cast<int>(63 - seed * 5)};
        EXPECT_EQ(remote.segment(img, p), local->segment(img, p));
    }
    EXPECT_EQ(remote.call_count(), 10u);
}

TEST(SubprocessOracle, ServerErrorsAndExitAreOracleErrors) {
    SubprocessOracle remote({BAPS_CLI_PATH, "blackbox-serve"});
    EXPECT_THROW(remote.segment(Image(4, 4, 1), {9, 9}), OracleError);
    EXPECT_NO_THROW(remote.segment(Image(4, 4, 1), {1, 1}));

    SubprocessOracle dead({"/bin/false"});
    EXPECT_THROW(dead.segment(Image(4, 4, 1), {1, 1}), OracleError);
}
