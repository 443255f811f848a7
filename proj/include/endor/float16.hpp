#pragma once

#include <bit>
#include <cstdint>

namespace endor {

// IEEE 754 binary16 <-> binary32 conversion on raw bit patterns.
// No hardware half support is assumed; conversions are pure bit
// manipulation so results are identical on every platform.

inline float f16_to_f32(std::uint16_t h) noexcept {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1Fu;
    const std::uint32_t mant = h & 0x3FFu;

    std::uint32_t out;
    if (exp == 0) {
        if (mant == 0) {
            out = sign; // +-0
        } else {
            // Subnormal: value = mant * 2^-24. Normalize into binary32.
            const int top = 31 - std::countl_zero(mant);
            out = sign | (static_cast<std::uint32_t>(top + 103) << 23) |
                  ((mant << (23 - top)) & 0x7FFFFFu);
        }
    } else if (exp == 0x1F) {
        out = sign | 0x7F800000u | (mant << 13); // inf / NaN, payload kept
    } else {
        out = sign | ((exp + 112u) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(out);
}

inline std::uint16_t f32_to_f16(float f) noexcept {
    const std::uint32_t x = std::bit_cast<std::uint32_t>(f);
    const auto sign = static_cast<std::uint16_t>((x >> 16) & 0x8000u);
    const std::uint32_t mag = x & 0x7FFFFFFFu;

    if (mag >= 0x7F800000u) { // inf / NaN
        if (mag == 0x7F800000u) return static_cast<std::uint16_t>(sign | 0x7C00u);
        std::uint16_t payload = static_cast<std::uint16_t>((mag >> 13) & 0x3FFu);
        if (payload == 0) payload = 0x200u; // NaN must keep a nonzero mantissa
        return static_cast<std::uint16_t>(sign | 0x7C00u | payload);
    }
    if (mag >= 0x477FF000u) { // rounds past binary16 max (65504) -> inf
        return static_cast<std::uint16_t>(sign | 0x7C00u);
    }

    const std::uint32_t exp = mag >> 23;
    if (exp >= 0x71u) {
        // Normal result; round to nearest even on the 13 dropped bits.
        const std::uint32_t mant = mag & 0x7FFFFFu;
        std::uint32_t half = ((exp - 0x70u) << 10) | (mant >> 13);
        const std::uint32_t rem = mant & 0x1FFFu;
        half += (rem > 0x1000u) || (rem == 0x1000u && (half & 1u));
        return static_cast<std::uint16_t>(sign | half);
    }

    // Subnormal result: value = m * 2^-24 with m rounded to nearest even.
    const std::uint32_t m24 = (mag & 0x7FFFFFu) | 0x800000u;
    const std::uint32_t shift = 126u - exp; // >= 14
    if (shift > 24u) {
        // Below half the smallest subnormal, except the exact tie at 2^-25
        // which also rounds to zero (ties-to-even).
        return sign;
    }
    std::uint32_t m = m24 >> shift;
    const std::uint32_t rem = m24 & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1);
    m += (rem > halfway) || (rem == halfway && (m & 1u));
    return static_cast<std::uint16_t>(sign | m); // may carry into exponent 1
}

inline bool f16_is_zero(std::uint16_t h) noexcept { return (h & 0x7FFFu) == 0; }
inline bool f16_is_negative_zero(std::uint16_t h) noexcept { return h == 0x8000u; }

} // namespace endor
