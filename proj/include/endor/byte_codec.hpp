#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "endor/error.hpp"

namespace endor {

// General-purpose byte-stream compressor interface, the stand-in for
// running an external compressor executable over serialized weights.
class ByteCompressor {
public:
    virtual ~ByteCompressor() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::byte> compress_bytes(std::span<const std::byte> input) const = 0;
    // expected_len is the known decompressed size (weights have fixed
    // shapes, so callers always know it).
    virtual std::vector<std::byte> decompress_bytes(std::span<const std::byte> input,
                                                    std::size_t expected_len) const = 0;
};

// Pass-through codec for tests.
class IdentityCodec final : public ByteCompressor {
public:
    std::string name() const override { return "identity"; }
    std::vector<std::byte> compress_bytes(std::span<const std::byte> input) const override {
        return {input.begin(), input.end()};
    }
    std::vector<std::byte> decompress_bytes(std::span<const std::byte> input,
                                            std::size_t expected_len) const override {
        if (input.size() != expected_len) {
            throw CodecFault("identity codec: length mismatch");
        }
        return {input.begin(), input.end()};
    }
};

// zlib deflate, the general-purpose compressor built into this project.
class ZlibCodec final : public ByteCompressor {
public:
    explicit ZlibCodec(int level = 6) : level_(level) {}

    std::string name() const override { return "zlib"; }

    std::vector<std::byte> compress_bytes(std::span<const std::byte> input) const override {
        uLongf bound = compressBound(static_cast<uLong>(input.size()));
        std::vector<std::byte> out(bound);
        const int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                                 reinterpret_cast<const Bytef*>(input.data()),
                                 static_cast<uLong>(input.size()), level_);
        if (rc != Z_OK) throw CodecFault("zlib compress failed: " + std::to_string(rc));
        out.resize(bound);
        return out;
    }

    std::vector<std::byte> decompress_bytes(std::span<const std::byte> input,
                                            std::size_t expected_len) const override {
        std::vector<std::byte> out(expected_len);
        uLongf len = static_cast<uLongf>(expected_len);
        const int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &len,
                                  reinterpret_cast<const Bytef*>(input.data()),
                                  static_cast<uLong>(input.size()));
        if (rc != Z_OK || len != expected_len) {
            throw CodecFault("zlib decompress failed: " + std::to_string(rc));
        }
        return out;
    }

private:
    int level_;
};

struct ByteCodecReport {
    std::string codec_name;
    std::uint64_t input_bytes = 0;
    std::uint64_t output_bytes = 0;
    double compress_seconds = 0.0;
    double decompress_seconds = 0.0;

    double ratio() const noexcept {
        return input_bytes ? static_cast<double>(output_bytes) / static_cast<double>(input_bytes)
                           : 0.0;
    }
};

// Compress, decompress, verify the payload came back identical, and
// record sizes and single-threaded wall times.
inline ByteCodecReport byte_codec_roundtrip(std::span<const std::byte> payload,
                                            const ByteCompressor& codec) {
    if (payload.empty()) throw std::invalid_argument("payload must be non-empty");
    using clock = std::chrono::steady_clock;

    const auto t0 = clock::now();
    const std::vector<std::byte> compressed = codec.compress_bytes(payload);
    const auto t1 = clock::now();
    const std::vector<std::byte> restored = codec.decompress_bytes(compressed, payload.size());
    const auto t2 = clock::now();

    if (restored.size() != payload.size() ||
        !std::equal(restored.begin(), restored.end(), payload.begin())) {
        throw CodecFault(codec.name() + ": round trip did not reproduce the input");
    }

    ByteCodecReport r;
    r.codec_name = codec.name();
    r.input_bytes = payload.size();
    r.output_bytes = compressed.size();
    r.compress_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.decompress_seconds = std::chrono::duration<double>(t2 - t1).count();
    return r;
}

} // namespace endor
