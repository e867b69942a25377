#pragma once

// Split file layout (little-endian):
//   "BAPD", u32 version (1), u32 count, u32 H, u32 W, u32 C, u32 first sample id
//   count x H x W x C float32 images (channels-last)
//   count x H x W uint8 masks

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "baps/core/bytes.hpp"
#include "baps/core/error.hpp"
#include "baps/core/format.hpp"
#include "baps/dataset/generator.hpp"

namespace baps::dataset {

inline constexpr std::array<char, 4> kDatasetMagic{'B', 'A', 'P', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 28;

inline std::vector<unsigned char> encode_split(const SampleSet& samples) {
    if (samples.empty()) throw DataError("cannot write an empty split");
    const auto& first = samples.front().image;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].image.same_shape(first)) throw DataError("split images differ in shape");
        if (samples[i].sample_id != samples.front().sample_id + i)
            throw DataError("split sample ids must be consecutive");
    }
    std::vector<unsigned char> out(kDatasetMagic.begin(), kDatasetMagic.end());
    le::put_u32(out, kDatasetVersion);
    le::put_u32(out, static_cast<std::uint32_t>(samples.size()));
    le::put_u32(out, static_cast<std::uint32_t>(first.height));
    le::put_u32(out, static_cast<std::uint32_t>(first.width));
    le::put_u32(out, static_cast<std::uint32_t>(first.channels));
    le::put_u32(out, samples.front().sample_id);
    for (const auto& s : samples)
        for (float v : s.image.values) le::put_f32(out, v);
    for (const auto& s : samples) out.insert(out.end(), s.gt.values.begin(), s.gt.values.end());
    return out;
}

inline SampleSet decode_split(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kDatasetHeaderBytes || std::memcmp(bytes.data(), kDatasetMagic.data(), 4) != 0)
        throw DataError("not a dataset split file (bad magic)");
    const unsigned char* p = bytes.data();
    if (le::get_u32(p + 4) != kDatasetVersion) throw DataError("unsupported dataset version");
    const auto count = le::get_u32(p + 8), h = le::get_u32(p + 12), w = le::get_u32(p + 16), c = le::get_u32(p + 20);
    const auto id_base = le::get_u32(p + 24);
    if (count == 0 || h == 0 || w == 0 || (c != 1 && c != 3)) throw DataError("dataset header is invalid");
    const std::size_t pixels = static_cast<std::size_t>(h) * w;
    const std::size_t expected = kDatasetHeaderBytes + count * pixels * c * 4 + count * pixels;
    if (bytes.size() != expected) throw DataError("dataset file size does not match its header");

    SampleSet out(count);
    const unsigned char* img_ptr = p + kDatasetHeaderBytes;
    const unsigned char* mask_ptr = img_ptr + count * pixels * c * 4;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& s = out[i];
        s.sample_id = id_base + i;
        s.image = Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
        for (auto& v : s.image.values) {
            v = le::get_f32(img_ptr);
            img_ptr += 4;
        }
        s.gt = BinaryMask(static_cast<int>(h), static_cast<int>(w));
        for (auto& m : s.gt.values) {
            const unsigned char b = *mask_ptr++;
            if (b > 1) throw DataError("dataset mask is not binary");
            m = b;
        }
    }
    return out;
}

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path);
}

inline void save_split(const std::string& path, const SampleSet& samples) { write_file(path, encode_split(samples)); }
inline SampleSet load_split(const std::string& path) { return decode_split(read_file(path)); }

/// Writes train.bin, val.bin and test.bin into `dir`.
inline void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    save_split((dir / "train.bin").string(), ds.train);
    save_split((dir / "val.bin").string(), ds.val);
    save_split((dir / "test.bin").string(), ds.test);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    return {load_split((dir / "train.bin").string()), load_split((dir / "val.bin").string()),
            load_split((dir / "test.bin").string())};
}

/// Content hash of a split, independent of where it came from.
inline std::string fingerprint(const SampleSet& samples) {
    Fnv1a h;
    const auto bytes = encode_split(samples);
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

}  // namespace baps::dataset
