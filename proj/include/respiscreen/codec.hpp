#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/thermal.hpp"

namespace respiscreen {

/**
 * THRM container v1, little-endian throughout.
 *
 *   header:
 *     magic      4 x u8   "THRM"
 *     version    u16      1
 *     width      u16
 *     height     u16
 *     frame_count u32
 *     fps_milli  u32      fps * 1000, rounded
 *     cal_slope  f64      degC per count
 *     cal_offset f64      degC
 *   then frame_count frames, each:
 *     timestamp_micros u64
 *     counts           width*height x u16, row-major
 */
inline constexpr uint8_t kThrmMagic[4] = {0x54, 0x48, 0x52, 0x4D};
inline constexpr uint16_t kThrmVersion = 1;
inline constexpr size_t kThrmHeaderSize = 34;

enum class ThrmErrc {
    BadMagic,
    UnsupportedVersion,
    TruncatedPayload,
    DimensionOverflow,
    NonMonotonicTimestamps,
};

inline const char* to_string(ThrmErrc e) {
    switch (e) {
        case ThrmErrc::BadMagic: return "BAD_MAGIC";
        case ThrmErrc::UnsupportedVersion: return "UNSUPPORTED_VERSION";
        case ThrmErrc::TruncatedPayload: return "TRUNCATED_PAYLOAD";
        case ThrmErrc::DimensionOverflow: return "DIMENSION_OVERFLOW";
        case ThrmErrc::NonMonotonicTimestamps: return "NON_MONOTONIC_TIMESTAMPS";
    }
    return "UNKNOWN";
}

class ThrmError : public std::runtime_error {
public:
    ThrmError(ThrmErrc kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ThrmErrc kind() const { return kind_; }

private:
    ThrmErrc kind_;
};

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}
inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline void put_f64(std::vector<uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<uint64_t>(v));
}

struct Reader {
    const uint8_t* p;
    size_t remaining;

    void need(size_t n) const {
        if (remaining < n)
            throw ThrmError(ThrmErrc::TruncatedPayload,
                            "need " + std::to_string(n) + " more bytes, have " +
                                std::to_string(remaining));
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        remaining -= 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
        p += 4;
        remaining -= 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
        p += 8;
        remaining -= 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

/// Serializes a structurally valid clip. Uniform timestamps are not required
/// here; a clip with dropped frames still encodes.
inline std::vector<uint8_t> encode_clip(const RadiometricClip& clip) {
    if (std::string msg = clip.validate(false); !msg.empty())
        throw std::invalid_argument("encode_clip: " + msg);
    if (clip.width > 65535 || clip.height > 65535)
        throw std::invalid_argument("encode_clip: dimensions exceed u16 range");
    const double fps_milli = std::round(clip.fps * 1000.0);
    if (!(fps_milli >= 1.0 && fps_milli <= 4294967295.0))
        throw std::invalid_argument("encode_clip: fps out of container range");

    std::vector<uint8_t> out;
    const size_t px = static_cast<size_t>(clip.width) * clip.height;
    out.reserve(kThrmHeaderSize + clip.frames.size() * (8 + 2 * px));
    out.insert(out.end(), kThrmMagic, kThrmMagic + 4);
    detail::put_u16(out, kThrmVersion);
    detail::put_u16(out, static_cast<uint16_t>(clip.width));
    detail::put_u16(out, static_cast<uint16_t>(clip.height));
    detail::put_u32(out, static_cast<uint32_t>(clip.frames.size()));
    detail::put_u32(out, static_cast<uint32_t>(fps_milli));
    detail::put_f64(out, clip.calibration.slope_c_per_count);
    detail::put_f64(out, clip.calibration.offset_c);
    for (const RadiometricFrame& f : clip.frames) {
        detail::put_u64(out, f.timestamp_micros);
        for (uint16_t c : f.counts) detail::put_u16(out, c);
    }
    return out;
}

/// Parses a THRM container. Throws ThrmError with a distinct kind per
/// failure mode.
inline RadiometricClip decode_clip(const uint8_t* data, size_t size) {
    detail::Reader r{data, size};
    r.need(4);
    if (std::memcmp(r.p, kThrmMagic, 4) != 0)
        throw ThrmError(ThrmErrc::BadMagic, "not a THRM container");
    r.p += 4;
    r.remaining -= 4;

    const uint16_t version = r.u16();
    if (version != kThrmVersion)
        throw ThrmError(ThrmErrc::UnsupportedVersion,
                        "version " + std::to_string(version) + ", expected 1");

    RadiometricClip clip;
    clip.width = r.u16();
    clip.height = r.u16();
    const uint32_t frame_count = r.u32();
    const uint32_t fps_milli = r.u32();
    clip.calibration.slope_c_per_count = r.f64();
    clip.calibration.offset_c = r.f64();
    clip.fps = fps_milli / 1000.0;

    if (clip.width == 0 || clip.height == 0)
        throw ThrmError(ThrmErrc::DimensionOverflow, "zero frame dimension");
    const uint64_t px = static_cast<uint64_t>(clip.width) * clip.height;
    const uint64_t frame_bytes = 8 + 2 * px;
    if (frame_count != 0 && frame_bytes > (UINT64_MAX - kThrmHeaderSize) / frame_count)
        throw ThrmError(ThrmErrc::DimensionOverflow, "declared payload size overflows");
    const uint64_t need = static_cast<uint64_t>(frame_count) * frame_bytes;
    if (r.remaining != need)
        throw ThrmError(ThrmErrc::TruncatedPayload,
                        "payload is " + std::to_string(r.remaining) + " bytes, header declares " +
                            std::to_string(need));

    clip.frames.resize(frame_count);
    for (uint32_t i = 0; i < frame_count; ++i) {
        RadiometricFrame& f = clip.frames[i];
        f.width = clip.width;
        f.height = clip.height;
        f.timestamp_micros = r.u64();
        if (i > 0 && f.timestamp_micros <= clip.frames[i - 1].timestamp_micros)
            throw ThrmError(ThrmErrc::NonMonotonicTimestamps,
                            "frame " + std::to_string(i) + " timestamp does not increase");
        f.counts.resize(px);
        for (uint64_t k = 0; k < px; ++k) f.counts[k] = r.u16();
    }
    return clip;
}

inline RadiometricClip decode_clip(const std::vector<uint8_t>& bytes) {
    return decode_clip(bytes.data(), bytes.size());
}

inline void write_thrm(const std::string& path, const RadiometricClip& clip) {
    const std::vector<uint8_t> bytes = encode_clip(clip);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline RadiometricClip read_thrm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_clip(bytes);
}

}  // namespace respiscreen
