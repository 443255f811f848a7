#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <variant>
#include <vector>

#include "endor/dense_matrix.hpp"
#include "endor/error.hpp"

namespace endor {

enum class CsrIndexWidth : std::uint8_t { Bits16 = 16, Bits32 = 32 };

inline std::size_t csr_index_bytes(CsrIndexWidth w) noexcept {
    return w == CsrIndexWidth::Bits16 ? 2 : 4;
}

// Compressed sparse row baseline. Column indices are physically 16- or
// 32-bit so the reported byte counts are honest; row offsets are 64-bit.
class CsrTensor {
public:
    using Indices16 = std::vector<std::uint16_t>;
    using Indices32 = std::vector<std::uint32_t>;

    CsrTensor() = default;
    CsrTensor(std::size_t rows, std::size_t cols, Dtype dtype,
              std::vector<std::uint64_t> row_offsets, std::variant<Indices16, Indices32> indices,
              std::vector<std::byte> values)
        : rows_(rows), cols_(cols), dtype_(dtype), row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(indices)), values_(std::move(values)) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Dtype dtype() const noexcept { return dtype_; }
    const std::vector<std::uint64_t>& row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::byte> values() const noexcept { return values_; }
    std::uint64_t nnz() const noexcept { return values_.size() / elem_bytes(dtype_); }

    CsrIndexWidth index_width() const noexcept {
        return std::holds_alternative<Indices16>(col_indices_) ? CsrIndexWidth::Bits16
                                                               : CsrIndexWidth::Bits32;
    }
    std::uint32_t col_index(std::uint64_t i) const noexcept {
        if (const auto* v = std::get_if<Indices16>(&col_indices_)) return (*v)[i];
        return std::get<Indices32>(col_indices_)[i];
    }

    std::size_t values_bytes() const noexcept { return values_.size(); }
    std::size_t index_bytes() const noexcept { return nnz() * csr_index_bytes(index_width()); }
    std::size_t offsets_bytes() const noexcept { return row_offsets_.size() * 8; }
    // Full payload including row offsets.
    std::size_t payload_bytes() const noexcept {
        return values_bytes() + index_bytes() + offsets_bytes();
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Dtype dtype_ = Dtype::F16;
    std::vector<std::uint64_t> row_offsets_;
    std::variant<Indices16, Indices32> col_indices_;
    std::vector<std::byte> values_;
};

inline CsrTensor csr_compress(const DenseMatrix& w, CsrIndexWidth width) {
    if (width == CsrIndexWidth::Bits16 && w.cols() > 65536) {
        throw ConfigError("16-bit column indices require cols <= 65536");
    }
    checked_element_count(w.rows(), w.cols());
    const std::size_t eb = w.elem_size();
    std::vector<std::uint64_t> offsets(w.rows() + 1, 0);
    CsrTensor::Indices16 idx16;
    CsrTensor::Indices32 idx32;
    std::vector<std::byte> values;
    const std::byte* src = w.bytes().data();

    std::uint64_t count = 0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
        for (std::size_t c = 0; c < w.cols(); ++c) {
            const std::size_t i = r * w.cols() + c;
            if (w.is_zero(i)) continue;
            if (width == CsrIndexWidth::Bits16) {
                idx16.push_back(static_cast<std::uint16_t>(c));
            } else {
                idx32.push_back(static_cast<std::uint32_t>(c));
            }
            values.insert(values.end(), src + i * eb, src + (i + 1) * eb);
            ++count;
        }
        offsets[r + 1] = count;
    }

    std::variant<CsrTensor::Indices16, CsrTensor::Indices32> indices;
    if (width == CsrIndexWidth::Bits16) {
        indices = std::move(idx16);
    } else {
        indices = std::move(idx32);
    }
    return CsrTensor(w.rows(), w.cols(), w.dtype(), std::move(offsets), std::move(indices),
                     std::move(values));
}

inline DenseMatrix csr_decompress(const CsrTensor& t) {
    const auto& off = t.row_offsets();
    if (off.size() != t.rows() + 1 || off.front() != 0 || off.back() != t.nnz()) {
        throw CorruptionError("CSR row offsets are malformed");
    }
    DenseMatrix out(t.rows(), t.cols(), t.dtype());
    const std::size_t eb = out.elem_size();
    const std::byte* vals = t.values().data();
    std::byte* dst = out.bytes().data();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        if (off[r + 1] < off[r]) throw CorruptionError("CSR row offsets are not non-decreasing");
        std::uint32_t prev_col = 0;
        for (std::uint64_t k = off[r]; k < off[r + 1]; ++k) {
            const std::uint32_t c = t.col_index(k);
            if (c >= t.cols() || (k > off[r] && c <= prev_col)) {
                throw CorruptionError("CSR column indices are malformed");
            }
            prev_col = c;
            std::memcpy(dst + (r * t.cols() + c) * eb, vals + k * eb, eb);
        }
    }
    return out;
}

// compressed / dense size for CSR, counting values and column indices
// only. Row offsets are asymptotically negligible and excluded here;
// CsrTensor::payload_bytes reports the exact total.
inline double csr_size_ratio(Dtype dtype, double sparsity, CsrIndexWidth width) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
        throw std::invalid_argument("sparsity must be in [0, 1]");
    }
    const double eb = static_cast<double>(elem_bytes(dtype));
    const double ib = static_cast<double>(csr_index_bytes(width));
    return (1.0 - sparsity) * (eb + ib) / eb;
}

} // namespace endor
