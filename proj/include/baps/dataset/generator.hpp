#pragma once

// Synthetic prompted-segmentation data. Each sample is a bright ellipse or
// lobed blob on a darker background, overlaid with a linear intensity ramp
// in a random direction and Gaussian pixel noise. The ramp is what makes
// the simulated blackbox truncate its region, so there is room for a
// learned visual prompt to help.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "baps/adapter/image.hpp"
#include "baps/core/error.hpp"
#include "baps/core/random.hpp"
#include "baps/metrics/masks.hpp"

namespace baps::dataset {

struct SegmentationSample {
    Image image;
    BinaryMask gt;
    std::uint32_t sample_id = 0;

    friend bool operator==(const SegmentationSample&, const SegmentationSample&) = default;
};

using SampleSet = std::vector<SegmentationSample>;

struct DatasetSpec {
    int n_train = 200;
    int n_val = 50;
    int n_test = 100;
    int height = 64;
    int width = 64;
    int channels = 3;
    double noise_std = 0.05;
    double ramp_strength = 0.3;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_train < 1 || n_val < 1 || n_test < 1) throw ConfigError("dataset: split sizes must be positive");
        if (height < 8 || width < 8) throw ConfigError("dataset: image must be at least 8x8");
        if (channels != 1 && channels != 3) throw ConfigError("dataset: channels must be 1 or 3");
        if (!(noise_std >= 0.0)) throw ConfigError("dataset: noise_std must be nonnegative");
        if (!(ramp_strength >= 0.0 && ramp_strength <= 1.0)) throw ConfigError("dataset: ramp_strength must lie in [0, 1]");
    }
};

struct Dataset {
    SampleSet train, val, test;
};

inline constexpr std::size_t kMinForegroundPixels = 16;
inline constexpr int kMaxShapeTries = 100;

namespace detail {

// Returns true if (x, y) lies inside the sampled shape.
struct Shape {
    bool blob = false;
    double cx = 0, cy = 0;
    double a = 1, b = 1, theta = 0;  // ellipse
    double r0 = 1;                   // blob
    std::array<double, 3> amp{}, phase{};

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        if (!blob) {
            const double c = std::cos(theta), s = std::sin(theta);
            const double u = (dx * c + dy * s) / a;
            const double v = (-dx * s + dy * c) / b;
            return u * u + v * v <= 1.0;
        }
        const double ang = std::atan2(dy, dx);
        double r = r0;
        for (int k = 0; k < 3; ++k) r += r0 * amp[k] * std::cos((k + 2) * ang + phase[k]);
        return dx * dx + dy * dy <= r * r;
    }
};

inline Shape sample_shape(int h, int w, RngStream& rng) {
    const double scale = std::min(h, w) / 64.0;
    Shape s;
    s.blob = rng.coin();
    const double rmin = 14.0 * scale, rmax = 28.0 * scale;
    const double margin = rmax * 0.6;
    s.cx = rng.uniform(margin, w - 1 - margin);
    s.cy = rng.uniform(margin, h - 1 - margin);
    if (s.blob) {
        s.r0 = rng.uniform(rmin, rmax);
        for (int k = 0; k < 3; ++k) {
            s.amp[k] = rng.uniform(0.0, 0.15);
            s.phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    } else {
        s.a = rng.uniform(rmin, rmax);
        s.b = rng.uniform(rmin, rmax);
        s.theta = rng.uniform(0.0, std::numbers::pi);
    }
    return s;
}

// Zero-mean per-channel tint so the channel average stays at the base level.
inline std::array<double, 3> tint(int channels, RngStream& rng) {
    std::array<double, 3> t{};
    if (channels == 1) return t;
    double mean = 0.0;
    for (auto& v : t) mean += (v = rng.uniform(-0.05, 0.05));
    mean /= 3.0;
    for (auto& v : t) v -= mean;
    return t;
}

}  // namespace detail

/// One sample, fully determined by (spec, stream).
inline SegmentationSample generate_sample(const DatasetSpec& spec, RngStream rng, std::uint32_t sample_id) {
    const int h = spec.height, w = spec.width, ch = spec.channels;
    BinaryMask gt(h, w);
    detail::Shape shape;
    int tries = 0;
    for (;; ++tries) {
        if (tries == kMaxShapeTries)
            throw DataError("dataset: could not draw a shape with >= 16 foreground pixels in 100 tries");
        shape = detail::sample_shape(h, w, rng);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) gt.at(y, x) = shape.contains(x, y) ? 1 : 0;
        if (count_foreground(gt) >= kMinForegroundPixels) break;
    }

    const double fg = 0.8 + rng.uniform(-0.05, 0.05);
    const double bg = 0.2 + rng.uniform(-0.05, 0.05);
    const auto fg_tint = detail::tint(ch, rng);
    const auto bg_tint = detail::tint(ch, rng);
    const double ramp_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double rc = std::cos(ramp_angle), rs = std::sin(ramp_angle);
    const double extent = std::abs(rc) * (w - 1) + std::abs(rs) * (h - 1);
    const double mx = 0.5 * (w - 1), my = 0.5 * (h - 1);

    Image img(h, w, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool inside = gt.at(y, x) != 0;
            // Zero-mean ramp spanning ramp_strength across the image.
            const double ramp = extent > 0 ? spec.ramp_strength * ((x - mx) * rc + (y - my) * rs) / extent : 0.0;
            for (int c = 0; c < ch; ++c) {
                double v = (inside ? fg + fg_tint[c] : bg + bg_tint[c]) + ramp;
                if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
                img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return {std::move(img), std::move(gt), sample_id};
}

enum class Split : std::uint64_t { train = 1, val = 2, test = 3 };

inline SampleSet generate_split(const DatasetSpec& spec, Split split, int count, std::uint32_t id_base) {
    const RngStream split_rng = RngStream(spec.seed).split(static_cast<std::uint64_t>(split));
    SampleSet out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(generate_sample(spec, split_rng.split(static_cast<std::uint64_t>(i)), id_base + i));
    return out;
}

/// Train, val and test use distinct sub-seeds and disjoint id ranges.
inline Dataset generate(const DatasetSpec& spec) {
    spec.validate();
    const auto n_train = static_cast<std::uint32_t>(spec.n_train);
    const auto n_val = static_cast<std::uint32_t>(spec.n_val);
    return {generate_split(spec, Split::train, spec.n_train, 0),
            generate_split(spec, Split::val, spec.n_val, n_train),
            generate_split(spec, Split::test, spec.n_test, n_train + n_val)};
}

/// Uniformly random foreground pixel of the mask.
inline PointPrompt sample_point_prompt(const BinaryMask& gt, RngStream& rng) {
    const std::size_t n = count_foreground(gt);
    if (n == 0) throw DataError("sample_point_prompt: mask has no foreground");
    std::size_t k = rng.below(n);
    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x)
            if (gt.at(y, x) && k-- == 0) return {x, y};
    throw DataError("sample_point_prompt: unreachable");
}

}  // namespace baps::dataset
