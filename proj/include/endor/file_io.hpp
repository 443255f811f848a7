#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#if defined(__unix__) || defined(__APPLE__)
#include <fcntl.h>
#include <unistd.h>
#endif

#include "endor/codec.hpp"
#include "endor/dense_matrix.hpp"
#include "endor/error.hpp"

namespace endor {

// On-disk containers. Everything is little-endian and fully
// deterministic: writing the same tensor twice produces byte-identical
// files. A trailing CRC-32 (IEEE) over all preceding bytes guards
// against truncation and bit rot.
//
// .endor layout:
//   "ENDR" | version u16 | dtype u8 | flags u8 | rows u64 | cols u64 |
//   nnz u64 | [quant_scale f32 iff flags bit0] | bitmap bytes
//   (LSB-first, row-major) | values (raw little-endian elements) |
//   crc32 u32
//
// .dense layout (bitmap- and nnz-free variant used for benchmarking):
//   "ENDD" | version u16 | dtype u8 | flags u8 | rows u64 | cols u64 |
//   values | crc32 u32

inline constexpr char kEndorMagic[4] = {'E', 'N', 'D', 'R'};
inline constexpr char kDenseMagic[4] = {'E', 'N', 'D', 'D'};
inline constexpr std::uint16_t kContainerVersion = 1;

inline constexpr std::uint8_t kFlagQuantized = 0x01;
inline constexpr std::uint8_t kFlagNegativeZeroCollapsed = 0x02;
inline constexpr std::uint8_t kKnownFlags = kFlagQuantized | kFlagNegativeZeroCollapsed;

inline std::size_t endor_header_bytes(bool quantized) noexcept {
    return 4 + 2 + 1 + 1 + 8 + 8 + 8 + (quantized ? 4 : 0);
}
inline constexpr std::size_t kDenseHeaderBytes = 4 + 2 + 1 + 1 + 8 + 8;
inline constexpr std::size_t kCrcBytes = 4;

// Exact size of the .endor file that write_endor_file produces.
inline std::uint64_t endor_file_bytes(const EndorTensor& t) {
    return endor_header_bytes(t.quant_scale().has_value()) + t.compressed_bytes() + kCrcBytes;
}
inline std::uint64_t dense_file_bytes(const DenseMatrix& w) {
    return kDenseHeaderBytes + w.size_bytes() + kCrcBytes;
}

namespace detail {

// Sequential little-endian writer over an exact-size buffer.
class Emitter {
public:
    explicit Emitter(std::size_t total) : buf_(total) {}

    void raw(const void* p, std::size_t n) {
        if (n > 0) std::memcpy(buf_.data() + at_, p, n);
        at_ += n;
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u16(std::uint16_t v) {
        const std::uint8_t b[2] = {static_cast<std::uint8_t>(v & 0xFF),
                                   static_cast<std::uint8_t>(v >> 8)};
        raw(b, 2);
    }
    void u32(std::uint32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
        raw(b, 4);
    }
    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
        raw(b, 8);
    }

    std::span<const std::byte> written() const { return {buf_.data(), at_}; }
    std::vector<std::byte> finish() && { return std::move(buf_); }

private:
    std::vector<std::byte> buf_;
    std::size_t at_ = 0;
};

class Cursor {
public:
    explicit Cursor(std::span<const std::byte> data) : data_(data) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    std::span<const std::byte> take(std::size_t n) {
        if (remaining() < n) {
            throw FormatError(FormatError::Kind::Truncated, "file ends mid-field");
        }
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint16_t u16() {
        auto s = take(2);
        return static_cast<std::uint16_t>(std::to_integer<std::uint16_t>(s[0]) |
                                          (std::to_integer<std::uint16_t>(s[1]) << 8));
    }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(s[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::to_integer<std::uint64_t>(s[i]) << (8 * i);
        return v;
    }

private:
    std::span<const std::byte> data_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::byte> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // crc32 takes uInt lengths; feed large buffers in slices.
    std::size_t done = 0;
    while (done < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - done, 1u << 30);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + done),
                    static_cast<uInt>(n));
        done += n;
    }
    return static_cast<std::uint32_t>(crc);
}

inline Dtype dtype_from_code(std::uint8_t code) {
    if (code == 0) return Dtype::F16;
    if (code == 1) return Dtype::I8;
    throw FormatError(FormatError::Kind::Malformed,
                      "unknown dtype code " + std::to_string(code));
}

inline std::vector<std::byte> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto len = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> data(len);
    if (len > 0 && !in.read(reinterpret_cast<char*>(data.data()),
                            static_cast<std::streamsize>(len))) {
        throw Error("short read from " + path.string());
    }
    return data;
}

inline void write_all(const std::filesystem::path& path, std::span<const std::byte> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    if (!out.write(reinterpret_cast<const char*>(data.data()),
                   static_cast<std::streamsize>(data.size()))) {
        throw Error("short write to " + path.string());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// .endor container
// ---------------------------------------------------------------------------

inline std::vector<std::byte> encode_endor(const EndorTensor& t) {
    detail::Emitter out(endor_file_bytes(t));
    out.raw(kEndorMagic, 4);
    out.u16(kContainerVersion);
    out.u8(static_cast<std::uint8_t>(t.dtype()));
    std::uint8_t flags = 0;
    if (t.quant_scale()) flags |= kFlagQuantized;
    if (t.negative_zero_collapsed()) flags |= kFlagNegativeZeroCollapsed;
    out.u8(flags);
    out.u64(t.rows());
    out.u64(t.cols());
    out.u64(t.nnz());
    if (t.quant_scale()) {
        std::uint32_t bits;
        const float scale = *t.quant_scale();
        std::memcpy(&bits, &scale, 4);
        out.u32(bits);
    }
    const auto bitmap = t.bitmap().to_bytes();
    out.raw(bitmap.data(), bitmap.size());
    out.raw(t.values().data(), t.values().size());
    out.u32(detail::crc32_of(out.written()));
    return std::move(out).finish();
}

inline EndorTensor decode_endor(std::span<const std::byte> data) {
    detail::Cursor cur(data);
    const auto magic = cur.take(4);
    if (std::memcmp(magic.data(), kEndorMagic, 4) != 0) {
        throw FormatError(FormatError::Kind::BadMagic, "not an .endor container");
    }
    const std::uint16_t version = cur.u16();
    if (version != kContainerVersion) {
        throw FormatError(FormatError::Kind::BadVersion,
                          "unsupported container version " + std::to_string(version));
    }
    const Dtype dtype = detail::dtype_from_code(std::to_integer<std::uint8_t>(cur.take(1)[0]));
    const auto flags = std::to_integer<std::uint8_t>(cur.take(1)[0]);
    if (flags & ~kKnownFlags) {
        throw FormatError(FormatError::Kind::Malformed, "unknown flag bits set");
    }
    const std::uint64_t rows = cur.u64();
    const std::uint64_t cols = cur.u64();
    const std::uint64_t nnz = cur.u64();
    std::optional<float> scale;
    if (flags & kFlagQuantized) {
        const std::uint32_t bits = cur.u32();
        float s;
        std::memcpy(&s, &bits, 4);
        scale = s;
    }

    std::uint64_t n;
    try {
        n = checked_element_count(rows, cols);
    } catch (const SizeError&) {
        throw FormatError(FormatError::Kind::Malformed, "rows*cols overflows");
    }
    if (nnz > n) {
        throw FormatError(FormatError::Kind::Malformed, "nnz exceeds rows*cols");
    }
    const std::uint64_t bitmap_len = (n + 7) / 8;
    const std::uint64_t values_len = nnz * elem_bytes(dtype);
    const std::uint64_t expect = cur.pos() + bitmap_len + values_len + kCrcBytes;
    if (data.size() < expect) {
        throw FormatError(FormatError::Kind::Truncated, "file shorter than declared layout");
    }
    if (data.size() > expect) {
        throw FormatError(FormatError::Kind::Malformed, "trailing bytes after declared layout");
    }
    const std::uint32_t want_crc = detail::crc32_of(data.first(data.size() - kCrcBytes));
    detail::Cursor tail(data.subspan(data.size() - kCrcBytes));
    if (tail.u32() != want_crc) {
        throw FormatError(FormatError::Kind::BadCrc, "CRC mismatch");
    }

    Bitmap bitmap;
    try {
        bitmap = Bitmap::from_bytes(cur.take(bitmap_len), n);
    } catch (const CorruptionError& e) {
        throw FormatError(FormatError::Kind::Malformed, e.what());
    }
    if (bitmap.count() != nnz) {
        throw FormatError(FormatError::Kind::CountMismatch,
                          "nnz field disagrees with bitmap popcount");
    }
    const auto values = cur.take(values_len);
    return EndorTensor(rows, cols, dtype, std::move(bitmap),
                       std::vector<std::byte>(values.begin(), values.end()), scale,
                       flags & kFlagNegativeZeroCollapsed);
}

inline std::uint64_t write_endor_file(const EndorTensor& t, const std::filesystem::path& path) {
    const auto data = encode_endor(t);
    detail::write_all(path, data);
    return data.size();
}

inline EndorTensor read_endor_file(const std::filesystem::path& path) {
    return decode_endor(detail::read_all(path));
}

// ---------------------------------------------------------------------------
// .dense container
// ---------------------------------------------------------------------------

inline std::vector<std::byte> encode_dense(const DenseMatrix& w) {
    detail::Emitter out(dense_file_bytes(w));
    out.raw(kDenseMagic, 4);
    out.u16(kContainerVersion);
    out.u8(static_cast<std::uint8_t>(w.dtype()));
    out.u8(0);
    out.u64(w.rows());
    out.u64(w.cols());
    out.raw(w.bytes().data(), w.bytes().size());
    out.u32(detail::crc32_of(out.written()));
    return std::move(out).finish();
}

inline DenseMatrix decode_dense(std::span<const std::byte> data) {
    detail::Cursor cur(data);
    const auto magic = cur.take(4);
    if (std::memcmp(magic.data(), kDenseMagic, 4) != 0) {
        throw FormatError(FormatError::Kind::BadMagic, "not a .dense container");
    }
    const std::uint16_t version = cur.u16();
    if (version != kContainerVersion) {
        throw FormatError(FormatError::Kind::BadVersion,
                          "unsupported container version " + std::to_string(version));
    }
    const Dtype dtype = detail::dtype_from_code(std::to_integer<std::uint8_t>(cur.take(1)[0]));
    if (std::to_integer<std::uint8_t>(cur.take(1)[0]) != 0) {
        throw FormatError(FormatError::Kind::Malformed, "unknown flag bits set");
    }
    const std::uint64_t rows = cur.u64();
    const std::uint64_t cols = cur.u64();
    std::uint64_t n;
    try {
        n = checked_element_count(rows, cols);
    } catch (const SizeError&) {
        throw FormatError(FormatError::Kind::Malformed, "rows*cols overflows");
    }
    const std::uint64_t values_len = n * elem_bytes(dtype);
    const std::uint64_t expect = cur.pos() + values_len + kCrcBytes;
    if (data.size() < expect) {
        throw FormatError(FormatError::Kind::Truncated, "file shorter than declared layout");
    }
    if (data.size() > expect) {
        throw FormatError(FormatError::Kind::Malformed, "trailing bytes after declared layout");
    }
    const std::uint32_t want_crc = detail::crc32_of(data.first(data.size() - kCrcBytes));
    detail::Cursor tail(data.subspan(data.size() - kCrcBytes));
    if (tail.u32() != want_crc) {
        throw FormatError(FormatError::Kind::BadCrc, "CRC mismatch");
    }
    const auto values = cur.take(values_len);
    return DenseMatrix(rows, cols, dtype, std::vector<std::byte>(values.begin(), values.end()));
}

inline std::uint64_t write_dense_file(const DenseMatrix& w, const std::filesystem::path& path) {
    const auto data = encode_dense(w);
    detail::write_all(path, data);
    return data.size();
}

inline DenseMatrix read_dense_file(const std::filesystem::path& path) {
    return decode_dense(detail::read_all(path));
}

// ---------------------------------------------------------------------------
// Read benchmark
// ---------------------------------------------------------------------------

struct BenchReport {
    std::string label;
    std::uint64_t bytes_read = 0;
    std::size_t repetitions = 0;
    bool cache_drop_attempted = false;
    std::vector<double> sample_seconds; // one per repetition
    double median_seconds = 0.0;
    double effective_bytes_per_second = 0.0;
};

// Time full sequential reads of a file into memory. With drop_cache the
// page cache is asked to evict the file before every repetition
// (best-effort; cache_drop_attempted records whether the request was
// accepted).
inline BenchReport bench_read(const std::filesystem::path& path, std::size_t repetitions,
                              bool drop_cache) {
    if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");

    BenchReport report;
    report.label = path.filename().string();
    report.repetitions = repetitions;

    std::vector<char> buffer(1 << 20);
    using clock = std::chrono::steady_clock;

    for (std::size_t rep = 0; rep < repetitions; ++rep) {
#if defined(__unix__) || defined(__APPLE__)
        const int fd = ::open(path.c_str(), O_RDONLY);
        if (fd < 0) throw Error("cannot open " + path.string());
        if (drop_cache) {
#if defined(POSIX_FADV_DONTNEED)
            report.cache_drop_attempted |= ::posix_fadvise(fd, 0, 0, POSIX_FADV_DONTNEED) == 0;
#endif
        }
        std::uint64_t total = 0;
        const auto t0 = clock::now();
        for (;;) {
            const ssize_t n = ::read(fd, buffer.data(), buffer.size());
            if (n < 0) {
                ::close(fd);
                throw Error("read failed on " + path.string());
            }
            if (n == 0) break;
            total += static_cast<std::uint64_t>(n);
        }
        const auto t1 = clock::now();
        ::close(fd);
#else
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        std::uint64_t total = 0;
        const auto t0 = clock::now();
        while (in.read(buffer.data(), static_cast<std::streamsize>(buffer.size())) ||
               in.gcount() > 0) {
            total += static_cast<std::uint64_t>(in.gcount());
        }
        const auto t1 = clock::now();
#endif
        report.bytes_read = total;
        report.sample_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }

    std::vector<double> sorted = report.sample_seconds;
    std::sort(sorted.begin(), sorted.end());
    report.median_seconds = sorted[sorted.size() / 2];
    report.effective_bytes_per_second =
        report.median_seconds > 0.0
            ? static_cast<double>(report.bytes_read) / report.median_seconds
            : 0.0;
    return report;
}

} // namespace endor
