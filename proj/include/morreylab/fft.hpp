#pragma once

#include <complex>
#include <vector>

#include "morreylab/errors.hpp"

namespace morreylab {
namespace fft {

using cd = std::complex<double>;

/// In-place iterative radix-2 transform; n must be a power of two.
/// sign = -1: forward (sum x_j e^{-2pi i jk/n}); sign = +1: inverse without
/// the 1/n normalization.
inline void transform(std::vector<cd>& a, int sign) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw param_error("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
        const cd wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline void forward(std::vector<cd>& a) { transform(a, -1); }
inline void inverse(std::vector<cd>& a) {
    transform(a, +1);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= inv;
}

/// Row-major 2-d transform, N x N.
inline void transform2d(std::vector<cd>& a, int N, int sign) {
    std::vector<cd> tmp(static_cast<std::size_t>(N));
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) tmp[c] = a[static_cast<std::size_t>(r) * N + c];
        transform(tmp, sign);
        for (int c = 0; c < N; ++c) a[static_cast<std::size_t>(r) * N + c] = tmp[c];
    }
    for (int c = 0; c < N; ++c) {
        for (int r = 0; r < N; ++r) tmp[r] = a[static_cast<std::size_t>(r) * N + c];
        transform(tmp, sign);
        for (int r = 0; r < N; ++r) a[static_cast<std::size_t>(r) * N + c] = tmp[r];
    }
}

/// Reference O(n^2) transform for cross-checking the fast path in tests.
inline std::vector<cd> naive_dft(const std::vector<cd>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<cd> out(n, cd(0, 0));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * 3.14159265358979323846 *
                               static_cast<double>(j * k % n) / static_cast<double>(n);
            out[k] += x[j] * cd(std::cos(ang), std::sin(ang));
        }
    return out;
}

} // namespace fft
} // namespace morreylab
