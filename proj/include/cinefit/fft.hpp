#pragma once

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"

namespace cinefit {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace detail {

// Twiddles w^k = exp(-2*pi*i*k/n), k < n/2, cached per length.
inline const std::vector<Complex>& twiddles(int n) {
    thread_local std::unordered_map<int, std::vector<Complex>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<Complex> w(static_cast<size_t>(n / 2));
    for (int k = 0; k < n / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * k / n;
        w[static_cast<size_t>(k)] = Complex(std::cos(a), std::sin(a));
    }
    return cache.emplace(n, std::move(w)).first->second;
}

// In-place iterative radix-2 transform, no normalization.
inline void fft_pow2(Complex* x, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const auto& w = twiddles(n);
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                const Complex tw = inverse ? std::conj(w[static_cast<size_t>(k * step)])
                                           : w[static_cast<size_t>(k * step)];
                const Complex u = x[i + k];
                const Complex v = x[i + k + len / 2] * tw;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

inline ComplexArray2 fft2_impl(const ComplexArray2& img, bool inverse) {
    check_arg(is_pow2(img.rows) && is_pow2(img.cols),
              "dimension error: fft2 requires power-of-two sides");
    ComplexArray2 out = img;
    for (int r = 0; r < out.rows; ++r) fft_pow2(out.row(r), out.cols, inverse);
    std::vector<Complex> col(static_cast<size_t>(out.rows));
    for (int c = 0; c < out.cols; ++c) {
        for (int r = 0; r < out.rows; ++r) col[static_cast<size_t>(r)] = out.at(r, c);
        fft_pow2(col.data(), out.rows, inverse);
        for (int r = 0; r < out.rows; ++r) out.at(r, c) = col[static_cast<size_t>(r)];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.rows) * out.cols);
    for (Complex& z : out.data) z *= scale;
    return out;
}

}  // namespace detail

// Unitary 2-D DFT: ||fft2(x)|| = ||x|| and ifft2(fft2(x)) = x.
inline ComplexArray2 fft2(const ComplexArray2& img) { return detail::fft2_impl(img, false); }
inline ComplexArray2 ifft2(const ComplexArray2& img) { return detail::fft2_impl(img, true); }

// Direct double-sum DFT with the same unitary normalization; the test oracle
// for fft2. Works for any rectangular shape.
inline ComplexArray2 dft2_naive(const ComplexArray2& img) {
    const int H = img.rows, W = img.cols;
    check_arg(H > 0 && W > 0, "dft2_naive on empty array");
    ComplexArray2 out(H, W);
    const double scale = 1.0 / std::sqrt(static_cast<double>(H) * W);
    for (int kr = 0; kr < H; ++kr) {
        for (int kc = 0; kc < W; ++kc) {
            Complex acc{};
            for (int r = 0; r < H; ++r) {
                for (int c = 0; c < W; ++c) {
                    const double a = -2.0 * std::numbers::pi *
                                     (static_cast<double>(kr) * r / H + static_cast<double>(kc) * c / W);
                    acc += img.at(r, c) * Complex(std::cos(a), std::sin(a));
                }
            }
            out.at(kr, kc) = acc * scale;
        }
    }
    return out;
}

}  // namespace cinefit
