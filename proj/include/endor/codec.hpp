#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "endor/bitmap.hpp"
#include "endor/dense_matrix.hpp"
#include "endor/error.hpp"
#include "endor/float16.hpp"

namespace endor {

inline constexpr std::uint64_t kDefaultChunkSize = 4096;

// Compressed weight tensor: a position bitmap plus the non-zero values
// packed in row-major scan order. rank(bitmap, i) is therefore the exact
// offset of element i inside values().
class EndorTensor {
public:
    EndorTensor() = default;

    EndorTensor(std::size_t rows, std::size_t cols, Dtype dtype, Bitmap bitmap,
                std::vector<std::byte> values, std::optional<float> quant_scale = std::nullopt,
                bool negative_zero_collapsed = false)
        : rows_(rows), cols_(cols), dtype_(dtype), bitmap_(std::move(bitmap)),
          values_(std::move(values)), quant_scale_(quant_scale),
          negzero_collapsed_(negative_zero_collapsed) {
        if (bitmap_.size() != checked_element_count(rows, cols)) {
            throw CorruptionError("bitmap length does not match rows*cols");
        }
        if (values_.size() != bitmap_.count() * elem_bytes(dtype)) {
            throw CorruptionError("values length does not match bitmap popcount");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Dtype dtype() const noexcept { return dtype_; }
    std::size_t element_count() const noexcept { return rows_ * cols_; }
    const Bitmap& bitmap() const noexcept { return bitmap_; }
    std::span<const std::byte> values() const noexcept { return values_; }
    std::uint64_t nnz() const noexcept { return values_.size() / elem_bytes(dtype_); }
    std::optional<float> quant_scale() const noexcept { return quant_scale_; }
    bool negative_zero_collapsed() const noexcept { return negzero_collapsed_; }

    std::size_t values_bytes() const noexcept { return values_.size(); }
    std::size_t bitmap_bytes() const noexcept { return bitmap_.byte_size(); }
    // Payload size, excluding any container header.
    std::size_t compressed_bytes() const noexcept { return values_bytes() + bitmap_bytes(); }
    std::size_t dense_bytes() const noexcept { return element_count() * elem_bytes(dtype_); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Dtype dtype_ = Dtype::F16;
    Bitmap bitmap_;
    std::vector<std::byte> values_;
    std::optional<float> quant_scale_;
    bool negzero_collapsed_ = false;
};

// ---------------------------------------------------------------------------
// Size arithmetic
// ---------------------------------------------------------------------------

// compressed bytes / dense bytes for an element-wise sparse tensor:
// (1 - sparsity) for the surviving values plus one bit per element for
// the bitmap. Header overhead is excluded.
inline double compression_ratio(Dtype dtype, double sparsity) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
        throw std::invalid_argument("sparsity must be in [0, 1]");
    }
    return (1.0 - sparsity) + 1.0 / (8.0 * static_cast<double>(elem_bytes(dtype)));
}

inline std::uint64_t endor_values_bytes(Dtype dtype, std::uint64_t nnz) {
    return nnz * elem_bytes(dtype);
}

inline std::uint64_t endor_bitmap_bytes(std::uint64_t rows, std::uint64_t cols) {
    return (checked_element_count(rows, cols) + 7) / 8;
}

// ---------------------------------------------------------------------------
// Compression / decompression
// ---------------------------------------------------------------------------

// Single row-major scan: mark non-zero positions in the bitmap and pack
// their raw element bytes. For f16, 0x8000 counts as zero and is
// dropped; the tensor records whether that happened.
inline EndorTensor compress(const DenseMatrix& w) {
    const std::uint64_t n = checked_element_count(w.rows(), w.cols());
    Bitmap bitmap(n);
    std::vector<std::byte> values;
    values.reserve(w.size_bytes() / 2);
    const std::byte* src = w.bytes().data();
    bool collapsed = false;

    if (w.dtype() == Dtype::F16) {
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, src + 2 * i, 2);
            if (f16_is_zero(v)) {
                collapsed |= f16_is_negative_zero(v);
            } else {
                bitmap.set(i);
                values.insert(values.end(), src + 2 * i, src + 2 * i + 2);
            }
        }
    } else {
        for (std::uint64_t i = 0; i < n; ++i) {
            if (src[i] != std::byte{0}) {
                bitmap.set(i);
                values.push_back(src[i]);
            }
        }
    }
    return EndorTensor(w.rows(), w.cols(), w.dtype(), std::move(bitmap), std::move(values),
                       std::nullopt, collapsed);
}

namespace detail {

// Scatter the values of bit range [begin, end) into dst, zero-filling
// unset positions. value_offset is the rank of `begin`.
inline void scatter_range(const EndorTensor& t, std::uint64_t begin, std::uint64_t end,
                          std::uint64_t value_offset, std::byte* dst) {
    const std::size_t eb = elem_bytes(t.dtype());
    const std::byte* vals = t.values().data();
    std::memset(dst + begin * eb, 0, (end - begin) * eb);
    const auto words = t.bitmap().words();
    std::uint64_t v = value_offset;
    std::uint64_t i = begin;
    while (i < end) {
        std::uint64_t word = words[i >> 6] >> (i & 63);
        const std::uint64_t span = std::min<std::uint64_t>(64 - (i & 63), end - i);
        if (span < 64) word &= (std::uint64_t{1} << span) - 1;
        while (word) {
            const auto bit = static_cast<std::uint64_t>(std::countr_zero(word));
            std::memcpy(dst + (i + bit) * eb, vals + v * eb, eb);
            ++v;
            word &= word - 1;
        }
        i += span;
    }
}

} // namespace detail

// Exact inverse of compress.
inline DenseMatrix decompress(const EndorTensor& t) {
    if (t.values_bytes() != t.bitmap().count() * elem_bytes(t.dtype())) {
        throw CorruptionError("values length does not match bitmap popcount");
    }
    DenseMatrix out(t.rows(), t.cols(), t.dtype());
    if (t.element_count() > 0) {
        detail::scatter_range(t, 0, t.element_count(), 0, out.bytes().data());
    }
    return out;
}

namespace detail {

inline void check_index(const EndorTensor& t, const RankIndex& idx) {
    const std::uint64_t n = t.element_count();
    const std::uint64_t cs = idx.chunk_size();
    const std::uint64_t chunks = n == 0 ? 0 : (n + cs - 1) / cs;
    if (cs == 0 || idx.chunk_count() != chunks) {
        throw CorruptionError("rank index does not cover the bitmap");
    }
    if (chunks > 0) {
        const std::uint64_t last_begin = (chunks - 1) * cs;
        const std::uint64_t tail = t.bitmap().rank_range(last_begin, n);
        if (idx.prefix().back() + tail != t.nnz()) {
            throw CorruptionError("rank index total disagrees with bitmap popcount");
        }
    }
}

} // namespace detail

// Decompress only chunk k into dst (a buffer for the whole dense
// matrix). Writes exactly the byte range covered by the chunk and
// nothing else.
inline void decompress_chunk_into(const EndorTensor& t, const RankIndex& idx, std::uint64_t k,
                                  std::span<std::byte> dst) {
    detail::check_index(t, idx);
    if (k >= idx.chunk_count()) throw BoundsError("chunk index out of range");
    if (dst.size() != t.dense_bytes()) {
        throw std::invalid_argument("destination buffer must hold the full dense matrix");
    }
    const std::uint64_t begin = k * idx.chunk_size();
    const std::uint64_t end = std::min<std::uint64_t>(begin + idx.chunk_size(), t.element_count());
    detail::scatter_range(t, begin, end, idx.prefix()[k], dst.data());
}

// Same output as decompress; each chunk is an independent scatter, so
// the loop body could run concurrently or in any order.
inline DenseMatrix decompress_chunked(const EndorTensor& t, const RankIndex& idx) {
    detail::check_index(t, idx);
    DenseMatrix out(t.rows(), t.cols(), t.dtype());
    std::byte* dst = out.bytes().data();
    for (std::uint64_t k = 0; k < idx.chunk_count(); ++k) {
        const std::uint64_t begin = k * idx.chunk_size();
        const std::uint64_t end =
            std::min<std::uint64_t>(begin + idx.chunk_size(), t.element_count());
        detail::scatter_range(t, begin, end, idx.prefix()[k], dst);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Selective extraction
// ---------------------------------------------------------------------------

namespace detail {

inline void check_sorted_unique(std::span<const std::size_t> indices, std::size_t limit,
                                const char* what) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= limit) throw BoundsError(std::string(what) + " index out of range");
        if (i > 0 && indices[i] <= indices[i - 1]) {
            throw std::invalid_argument(std::string(what) + " indices must be sorted and unique");
        }
    }
}

} // namespace detail

// Gather whole rows without materializing the full matrix: one forward
// rank walk locates each row's value offset, then the row range is
// scattered directly into the output.
inline DenseMatrix extract_rows(const EndorTensor& t, std::span<const std::size_t> rows) {
    detail::check_sorted_unique(rows, t.rows(), "row");
    DenseMatrix out(rows.size(), t.cols(), t.dtype());
    const std::size_t eb = elem_bytes(t.dtype());
    const std::uint64_t cols = t.cols();
    const Bitmap& bm = t.bitmap();
    const std::byte* vals = t.values().data();
    std::byte* dst = out.bytes().data();

    std::uint64_t rank_pos = 0;  // bitmap position up to which `rank` counts
    std::uint64_t rank = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::uint64_t begin = rows[r] * cols;
        rank += bm.rank_range(rank_pos, begin);
        rank_pos = begin;
        // Scatter this row into output row r.
        std::byte* row_dst = dst + r * cols * eb;
        std::memset(row_dst, 0, cols * eb);
        std::uint64_t v = rank;
        for (std::uint64_t c = 0; c < cols; ++c) {
            if (bm.test(begin + c)) {
                std::memcpy(row_dst + c * eb, vals + v * eb, eb);
                ++v;
            }
        }
    }
    return out;
}

// Gather whole columns; per-row value offsets come from the same
// incremental rank walk, and within a row the selected columns are
// ranked left to right.
inline DenseMatrix extract_cols(const EndorTensor& t, std::span<const std::size_t> cols) {
    detail::check_sorted_unique(cols, t.cols(), "column");
    DenseMatrix out(t.rows(), cols.size(), t.dtype());
    const std::size_t eb = elem_bytes(t.dtype());
    const std::uint64_t width = t.cols();
    const Bitmap& bm = t.bitmap();
    const std::byte* vals = t.values().data();
    std::byte* dst = out.bytes().data();
    if (!out.bytes().empty()) std::memset(dst, 0, out.size_bytes());

    std::uint64_t row_rank = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const std::uint64_t row_begin = r * width;
        std::uint64_t pos = row_begin; // rank within the row is counted from here
        std::uint64_t rank = row_rank;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const std::uint64_t bit = row_begin + cols[j];
            rank += bm.rank_range(pos, bit);
            pos = bit;
            if (bm.test(bit)) {
                std::memcpy(dst + (r * cols.size() + j) * eb, vals + rank * eb, eb);
            }
        }
        row_rank += bm.rank_range(row_begin, row_begin + width);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Joint quantization
// ---------------------------------------------------------------------------

// Symmetric per-tensor absmax quantization of the packed f16 values to
// int8. The bitmap is untouched; only the value bytes halve. An
// all-zero tensor gets the degenerate scale 1.0.
inline EndorTensor quantize_values(const EndorTensor& t) {
    if (t.dtype() != Dtype::F16) {
        throw std::invalid_argument("quantize_values requires an f16 tensor");
    }
    const std::uint64_t nnz = t.nnz();
    const std::byte* src = t.values().data();

    float absmax = 0.0f;
    for (std::uint64_t i = 0; i < nnz; ++i) {
        std::uint16_t h;
        std::memcpy(&h, src + 2 * i, 2);
        absmax = std::max(absmax, std::fabs(f16_to_f32(h)));
    }
    const float scale = nnz == 0 || absmax == 0.0f ? 1.0f : absmax / 127.0f;

    std::vector<std::byte> q(nnz);
    for (std::uint64_t i = 0; i < nnz; ++i) {
        std::uint16_t h;
        std::memcpy(&h, src + 2 * i, 2);
        const long r = std::lround(f16_to_f32(h) / scale);
        const auto clamped = static_cast<std::int8_t>(std::clamp<long>(r, -127, 127));
        q[i] = static_cast<std::byte>(static_cast<std::uint8_t>(clamped));
    }
    return EndorTensor(t.rows(), t.cols(), Dtype::I8, t.bitmap(), std::move(q), scale,
                       t.negative_zero_collapsed());
}

// Inverse mapping back to f16 values (lossy by the quantization step).
inline EndorTensor dequantize_values(const EndorTensor& t) {
    if (t.dtype() != Dtype::I8 || !t.quant_scale()) {
        throw std::invalid_argument("dequantize_values requires a quantized i8 tensor");
    }
    const float scale = *t.quant_scale();
    const std::uint64_t nnz = t.nnz();
    const std::byte* src = t.values().data();
    std::vector<std::byte> out(nnz * 2);
    for (std::uint64_t i = 0; i < nnz; ++i) {
        const auto q = static_cast<std::int8_t>(std::to_integer<std::uint8_t>(src[i]));
        const std::uint16_t h = f32_to_f16(static_cast<float>(q) * scale);
        std::memcpy(out.data() + 2 * i, &h, 2);
    }
    return EndorTensor(t.rows(), t.cols(), Dtype::F16, t.bitmap(), std::move(out), std::nullopt,
                       t.negative_zero_collapsed());
}

} // namespace endor
