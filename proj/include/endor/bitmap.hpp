#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "endor/error.hpp"

namespace endor {

// Position bitmap: one bit per matrix element, row-major element order.
// Bit i lives in word i/64 at position i%64; serialized little-endian,
// which makes the byte layout LSB-first (byte j, bit b holds element
// 8*j + b). Trailing bits past size() are kept zero.
class Bitmap {
public:
    Bitmap() = default;

    explicit Bitmap(std::uint64_t bit_count)
        : bit_count_(bit_count), words_((bit_count + 63) / 64, 0) {}

    std::uint64_t size() const noexcept { return bit_count_; }
    std::uint64_t byte_size() const noexcept { return (bit_count_ + 7) / 8; }

    bool test(std::uint64_t i) const noexcept {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::uint64_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

    // Total number of set bits.
    std::uint64_t count() const noexcept {
        std::uint64_t n = 0;
        for (std::uint64_t w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
        return n;
    }

    // Number of set bits in [0, end).
    std::uint64_t rank(std::uint64_t end) const noexcept { return rank_range(0, end); }

    // Number of set bits in [begin, end). Scans only the touched words.
    std::uint64_t rank_range(std::uint64_t begin, std::uint64_t end) const noexcept {
        if (begin >= end) return 0;
        const std::uint64_t wb = begin >> 6, we = (end - 1) >> 6;
        std::uint64_t first = words_[wb] >> (begin & 63);
        if (wb == we) {
            const std::uint64_t nbits = end - begin;
            if (nbits < 64) first &= (std::uint64_t{1} << nbits) - 1;
            return static_cast<std::uint64_t>(std::popcount(first));
        }
        std::uint64_t n = static_cast<std::uint64_t>(std::popcount(first));
        for (std::uint64_t w = wb + 1; w < we; ++w) {
            n += static_cast<std::uint64_t>(std::popcount(words_[w]));
        }
        std::uint64_t last = words_[we];
        const std::uint64_t tail = end - (we << 6);
        if (tail < 64) last &= (std::uint64_t{1} << tail) - 1;
        return n + static_cast<std::uint64_t>(std::popcount(last));
    }

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    // Serialized form: ceil(size/8) bytes, LSB-first within each byte.
    std::vector<std::byte> to_bytes() const {
        std::vector<std::byte> out(byte_size());
        if (!out.empty()) std::memcpy(out.data(), words_.data(), out.size());
        return out;
    }

    static Bitmap from_bytes(std::span<const std::byte> bytes, std::uint64_t bit_count) {
        if (bytes.size() != (bit_count + 7) / 8) {
            throw CorruptionError("bitmap byte length does not match bit count");
        }
        Bitmap b(bit_count);
        if (!bytes.empty()) std::memcpy(b.words_.data(), bytes.data(), bytes.size());
        // Padding bits must be zero; a stray set bit there would corrupt
        // every later value offset.
        if (const std::uint64_t used = bit_count & 63; used != 0 && !b.words_.empty()) {
            if (b.words_.back() >> used) {
                throw CorruptionError("bitmap has nonzero padding bits");
            }
        }
        return b;
    }

    bool operator==(const Bitmap& o) const noexcept {
        return bit_count_ == o.bit_count_ && words_ == o.words_;
    }

private:
    std::uint64_t bit_count_ = 0;
    std::vector<std::uint64_t> words_;
};

// Exclusive per-chunk popcount prefix over a bitmap. prefix()[k] is the
// rank of bit k*chunk_size, i.e. the packed-value offset at which chunk
// k starts, so chunks can be decompressed independently and in any
// order.
class RankIndex {
public:
    RankIndex() = default;
    RankIndex(std::uint64_t chunk_size, std::vector<std::uint64_t> prefix)
        : chunk_size_(chunk_size), prefix_(std::move(prefix)) {}

    std::uint64_t chunk_size() const noexcept { return chunk_size_; }
    std::size_t chunk_count() const noexcept { return prefix_.size(); }
    const std::vector<std::uint64_t>& prefix() const noexcept { return prefix_; }

private:
    std::uint64_t chunk_size_ = 0;
    std::vector<std::uint64_t> prefix_;
};

// chunk_size must be a power of two >= 64.
inline RankIndex build_rank_index(const Bitmap& bitmap, std::uint64_t chunk_size) {
    if (chunk_size < 64 || !std::has_single_bit(chunk_size)) {
        throw std::invalid_argument("chunk_size must be a power of two >= 64");
    }
    const std::uint64_t n = bitmap.size();
    const std::uint64_t chunks = n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
    std::vector<std::uint64_t> prefix(chunks);
    std::uint64_t running = 0;
    for (std::uint64_t k = 0; k < chunks; ++k) {
        prefix[k] = running;
        const std::uint64_t begin = k * chunk_size;
        const std::uint64_t end = begin + chunk_size < n ? begin + chunk_size : n;
        running += bitmap.rank_range(begin, end);
    }
    return RankIndex(chunk_size, std::move(prefix));
}

} // namespace endor
