#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "endor/error.hpp"
#include "endor/float16.hpp"

namespace endor {

// Element type of a weight tensor. The numeric codes double as the
// on-disk dtype codes.
enum class Dtype : std::uint8_t {
    F16 = 0, // IEEE binary16, stored as raw 16-bit patterns
    I8 = 1,  // signed 8-bit integer
};

inline std::size_t elem_bytes(Dtype t) noexcept { return t == Dtype::F16 ? 2 : 1; }

inline const char* dtype_name(Dtype t) noexcept { return t == Dtype::F16 ? "f16" : "i8"; }

// rows*cols with overflow check.
inline std::uint64_t checked_element_count(std::uint64_t rows, std::uint64_t cols) {
    if (rows != 0 && cols > std::numeric_limits<std::uint64_t>::max() / rows) {
        throw SizeError("matrix dimensions overflow the addressable element count");
    }
    return rows * cols;
}

// Row-major 2-D weight tensor. Elements are held as raw little-endian
// bytes so that f16 payloads (including NaNs) survive every round trip
// bit-exactly.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, Dtype dtype)
        : rows_(rows), cols_(cols), dtype_(dtype),
          data_(checked_element_count(rows, cols) * elem_bytes(dtype)) {}

    DenseMatrix(std::size_t rows, std::size_t cols, Dtype dtype, std::vector<std::byte> data)
        : rows_(rows), cols_(cols), dtype_(dtype), data_(std::move(data)) {
        if (data_.size() != checked_element_count(rows, cols) * elem_bytes(dtype)) {
            throw SizeError("dense data length does not match rows*cols*elem_bytes");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Dtype dtype() const noexcept { return dtype_; }
    std::size_t element_count() const noexcept { return rows_ * cols_; }
    std::size_t elem_size() const noexcept { return elem_bytes(dtype_); }
    std::size_t size_bytes() const noexcept { return data_.size(); }

    std::span<const std::byte> bytes() const noexcept { return data_; }
    std::span<std::byte> bytes() noexcept { return data_; }

    // Raw element accessors, index in row-major order.
    std::uint16_t get_u16(std::size_t i) const noexcept {
        std::uint16_t v;
        std::memcpy(&v, data_.data() + 2 * i, 2);
        return v;
    }
    void set_u16(std::size_t i, std::uint16_t v) noexcept {
        std::memcpy(data_.data() + 2 * i, &v, 2);
    }
    std::int8_t get_i8(std::size_t i) const noexcept {
        return static_cast<std::int8_t>(std::to_integer<std::uint8_t>(data_[i]));
    }
    void set_i8(std::size_t i, std::int8_t v) noexcept {
        data_[i] = static_cast<std::byte>(static_cast<std::uint8_t>(v));
    }

    // Element i == 0? For f16 both 0x0000 and 0x8000 count as zero.
    bool is_zero(std::size_t i) const noexcept {
        return dtype_ == Dtype::F16 ? f16_is_zero(get_u16(i)) : get_i8(i) == 0;
    }

    // Numeric value of element i as a double (f16 decoded).
    double value(std::size_t i) const noexcept {
        return dtype_ == Dtype::F16 ? static_cast<double>(f16_to_f32(get_u16(i)))
                                    : static_cast<double>(get_i8(i));
    }

    bool operator==(const DenseMatrix& o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_ && dtype_ == o.dtype_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Dtype dtype_ = Dtype::F16;
    std::vector<std::byte> data_;
};

// Copy with every f16 negative zero (0x8000) rewritten as +0. The
// compressor prunes both zero encodings, so a decompressed tensor is
// always in this canonical form.
inline DenseMatrix canonicalize_zeros(const DenseMatrix& w) {
    DenseMatrix out = w;
    if (w.dtype() == Dtype::F16) {
        const std::size_t n = w.element_count();
        for (std::size_t i = 0; i < n; ++i) {
            if (f16_is_negative_zero(out.get_u16(i))) out.set_u16(i, 0);
        }
    }
    return out;
}

} // namespace endor
