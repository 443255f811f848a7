#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "endor/dense_matrix.hpp"
#include "endor/float16.hpp"
#include "endor/model_catalog.hpp"

namespace endor {

// SplitMix64. Fixed constants so golden files reproduce on every
// platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [-1, 1).
    double next_signed_unit() noexcept {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53; // [0, 1)
        return 2.0 * u - 1.0;
    }

private:
    std::uint64_t state_;
};

// Deterministic synthetic weight: elements uniform in [-1, 1), rounded
// to the target element type.
inline DenseMatrix synth_weight(const OpShape& shape, std::uint64_t seed) {
    DenseMatrix w(shape.rows, shape.cols, shape.dtype);
    SplitMix64 rng(seed);
    const std::size_t n = w.element_count();
    if (shape.dtype == Dtype::F16) {
        for (std::size_t i = 0; i < n; ++i) {
            w.set_u16(i, f32_to_f16(static_cast<float>(rng.next_signed_unit())));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = std::lround(rng.next_signed_unit() * 127.0);
            w.set_i8(i, static_cast<std::int8_t>(std::clamp<long>(v, -127, 127)));
        }
    }
    return w;
}

namespace detail {

// Magnitude key that orders exactly like |v|: for f16 the biased bit
// pattern is monotone in |v| (NaNs sort last and are never pruned).
inline std::uint32_t magnitude_key(const DenseMatrix& w, std::size_t i) noexcept {
    if (w.dtype() == Dtype::F16) return w.get_u16(i) & 0x7FFFu;
    return static_cast<std::uint32_t>(std::abs(static_cast<int>(w.get_i8(i))));
}

inline void zero_element(DenseMatrix& w, std::size_t i) noexcept {
    if (w.dtype() == Dtype::F16) {
        w.set_u16(i, 0);
    } else {
        w.set_i8(i, 0);
    }
}

} // namespace detail

namespace detail {

template <typename Index>
void magnitude_prune_impl(const DenseMatrix& w, DenseMatrix& out, std::size_t target) {
    std::vector<Index> order(w.element_count());
    std::iota(order.begin(), order.end(), Index{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target) - 1,
                     order.end(), [&](Index a, Index b) {
                         const std::uint32_t ka = magnitude_key(w, a);
                         const std::uint32_t kb = magnitude_key(w, b);
                         return ka != kb ? ka < kb : a < b;
                     });
    for (std::size_t k = 0; k < target; ++k) zero_element(out, order[k]);
}

} // namespace detail

// Unstructured magnitude pruning: zero exactly floor(sparsity * n)
// elements of smallest |v|, ties pruned at the lower row-major index
// first.
inline DenseMatrix magnitude_prune(const DenseMatrix& w, double sparsity) {
    if (!(sparsity >= 0.0 && sparsity < 1.0)) {
        throw std::invalid_argument("sparsity must be in [0, 1)");
    }
    DenseMatrix out = w;
    const std::size_t n = w.element_count();
    const auto target = static_cast<std::size_t>(sparsity * static_cast<double>(n));
    if (target == 0) return out;

    // 32-bit indices halve the selection working set; every catalog
    // shape fits.
    if (n <= std::numeric_limits<std::uint32_t>::max()) {
        detail::magnitude_prune_impl<std::uint32_t>(w, out, target);
    } else {
        detail::magnitude_prune_impl<std::uint64_t>(w, out, target);
    }
    return out;
}

// N:M structured pruning: in each aligned group of m consecutive
// elements of a row, only the n largest-|v| survive. A final partial
// group is treated as its own group. Ties prune the lower index first.
inline DenseMatrix nm_prune(const DenseMatrix& w, std::size_t n, std::size_t m) {
    if (n == 0 || n > m) throw std::invalid_argument("require 0 < n <= m");
    DenseMatrix out = w;
    if (n == m) return out;
    std::vector<std::size_t> group;
    group.reserve(m);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        for (std::size_t g0 = 0; g0 < w.cols(); g0 += m) {
            const std::size_t g1 = std::min(g0 + m, w.cols());
            group.clear();
            for (std::size_t c = g0; c < g1; ++c) group.push_back(r * w.cols() + c);
            if (group.size() <= n) continue;
            // Survivors: top n by |v|, higher index wins ties.
            std::nth_element(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n) - 1,
                             group.end(), [&](std::size_t a, std::size_t b) {
                                 const std::uint32_t ka = detail::magnitude_key(w, a);
                                 const std::uint32_t kb = detail::magnitude_key(w, b);
                                 return ka != kb ? ka > kb : a > b;
                             });
            for (std::size_t k = n; k < group.size(); ++k) detail::zero_element(out, group[k]);
        }
    }
    return out;
}

// Fraction of zero elements (f16 counts both zero encodings).
inline double measure_sparsity(const DenseMatrix& w) {
    const std::size_t n = w.element_count();
    if (n == 0) return 0.0;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i) zeros += w.is_zero(i);
    return static_cast<double>(zeros) / static_cast<double>(n);
}

} // namespace endor
