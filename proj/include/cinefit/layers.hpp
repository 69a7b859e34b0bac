#pragma once

#include <cmath>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/runtime.hpp"

namespace cinefit {

inline constexpr double kLayerNormEps = 1e-5;

// Forward kernels for the fixed feed-forward pipeline. Each output row is
// produced by exactly one worker and inner summation order never changes, so
// parallel results match serial ones bit for bit.

// Y = X * W^T + bias (broadcast per row). X: N x E, W: O x E, bias: 1 x O.
inline void linear_forward(const RealArray2& W, const RealArray2& bias, const RealArray2& X,
                           RealArray2& Y) {
    check_dim(W.cols == X.cols, "linear_forward: W.cols != X.cols");
    check_dim(bias.rows == 1 && bias.cols == W.rows, "linear_forward: bias shape");
    if (Y.rows != X.rows || Y.cols != W.rows) Y = RealArray2(X.rows, W.rows);
    const int E = X.cols, O = W.rows;
    runtime::parallel_for(X.rows, [&](int lo, int hi) {
        for (int n = lo; n < hi; ++n) {
            const double* xr = X.row(n);
            double* yr = Y.row(n);
            for (int o = 0; o < O; ++o) {
                const double* wr = W.row(o);
                double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
                int e = 0;
                for (; e + 4 <= E; e += 4) {
                    a0 += xr[e] * wr[e];
                    a1 += xr[e + 1] * wr[e + 1];
                    a2 += xr[e + 2] * wr[e + 2];
                    a3 += xr[e + 3] * wr[e + 3];
                }
                double acc = (a0 + a1) + (a2 + a3);
                for (; e < E; ++e) acc += xr[e] * wr[e];
                yr[o] = acc + bias.data[static_cast<size_t>(o)];
            }
        }
    });
}

inline RealArray2 linear_forward(const Parameter& W, const Parameter& bias, const RealArray2& X) {
    RealArray2 Y;
    linear_forward(W.value, bias.value, X, Y);
    return Y;
}

// Accumulates dW += dY^T * X and dbias += column sums of dY; writes dX = dY * W
// when a destination is given. X must be the forward input.
inline void linear_backward(const RealArray2& W, const RealArray2& X, const RealArray2& dY,
                            RealArray2& dW, RealArray2& dbias, RealArray2* dX) {
    check_dim(dY.rows == X.rows && dY.cols == W.rows, "linear_backward: dY shape");
    check_dim(dW.rows == W.rows && dW.cols == W.cols, "linear_backward: dW shape");
    const int N = X.rows, E = X.cols, O = W.rows;
    runtime::parallel_for(O, [&](int lo, int hi) {
        for (int o = lo; o < hi; ++o) {
            double* dwr = dW.row(o);
            double db = 0;
            for (int n = 0; n < N; ++n) {
                const double g = dY.at(n, o);
                db += g;
                const double* xr = X.row(n);
                for (int e = 0; e < E; ++e) dwr[e] += g * xr[e];
            }
            dbias.data[static_cast<size_t>(o)] += db;
        }
    });
    if (dX) {
        if (dX->rows != N || dX->cols != E) *dX = RealArray2(N, E);
        runtime::parallel_for(N, [&](int lo, int hi) {
            for (int n = lo; n < hi; ++n) {
                double* dxr = dX->row(n);
                for (int e = 0; e < E; ++e) dxr[e] = 0.0;
                const double* gr = dY.row(n);
                for (int o = 0; o < O; ++o) {
                    const double g = gr[o];
                    const double* wr = W.row(o);
                    for (int e = 0; e < E; ++e) dxr[e] += g * wr[e];
                }
            }
        });
    }
}

inline void linear_backward(Parameter& W, Parameter& bias, const RealArray2& X,
                            const RealArray2& dY, RealArray2* dX) {
    linear_backward(W.value, X, dY, W.grad, bias.grad, dX);
}

// Elementwise max(0, x). Backward passes gradient where the cached input is
// strictly positive; the subgradient at 0 is 0.
inline void relu_forward(const RealArray2& A, RealArray2& R) {
    if (!R.same_shape(A)) R = RealArray2(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) R.data[i] = A.data[i] > 0.0 ? A.data[i] : 0.0;
}

inline void relu_backward(const RealArray2& A, const RealArray2& dR, RealArray2& dA) {
    check_dim(A.same_shape(dR), "relu_backward: shape mismatch");
    if (!dA.same_shape(A)) dA = RealArray2(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) dA.data[i] = A.data[i] > 0.0 ? dR.data[i] : 0.0;
}

// Per-row normalization to zero mean and unit variance (population variance,
// no learnable affine). inv_std per row is cached for the backward pass.
inline void layernorm_forward(const RealArray2& X, RealArray2& Y, std::vector<double>& inv_std) {
    check_dim(X.cols >= 2, "layernorm_forward: feature dimension must be >= 2");
    if (!Y.same_shape(X)) Y = RealArray2(X.rows, X.cols);
    inv_std.resize(static_cast<size_t>(X.rows));
    const int D = X.cols;
    runtime::parallel_for(X.rows, [&](int lo, int hi) {
        for (int n = lo; n < hi; ++n) {
            const double* xr = X.row(n);
            double mean = 0;
            for (int d = 0; d < D; ++d) mean += xr[d];
            mean /= D;
            double var = 0;
            for (int d = 0; d < D; ++d) {
                const double c = xr[d] - mean;
                var += c * c;
            }
            var /= D;
            const double is = 1.0 / std::sqrt(var + kLayerNormEps);
            inv_std[static_cast<size_t>(n)] = is;
            double* yr = Y.row(n);
            for (int d = 0; d < D; ++d) yr[d] = (xr[d] - mean) * is;
        }
    });
}

// dX_i = inv_std * (dY_i - mean(dY) - Y_i * mean(dY .* Y)), rowwise.
inline void layernorm_backward(const RealArray2& Y, const std::vector<double>& inv_std,
                               const RealArray2& dY, RealArray2& dX) {
    check_dim(Y.same_shape(dY), "layernorm_backward: shape mismatch");
    if (!dX.same_shape(Y)) dX = RealArray2(Y.rows, Y.cols);
    const int D = Y.cols;
    runtime::parallel_for(Y.rows, [&](int lo, int hi) {
        for (int n = lo; n < hi; ++n) {
            const double* yr = Y.row(n);
            const double* gr = dY.row(n);
            double g_mean = 0, gy_mean = 0;
            for (int d = 0; d < D; ++d) {
                g_mean += gr[d];
                gy_mean += gr[d] * yr[d];
            }
            g_mean /= D;
            gy_mean /= D;
            const double is = inv_std[static_cast<size_t>(n)];
            double* dxr = dX.row(n);
            for (int d = 0; d < D; ++d) dxr[d] = is * (gr[d] - g_mean - yr[d] * gy_mean);
        }
    });
}

}  // namespace cinefit
