#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/fft.hpp"
#include "cinefit/model.hpp"
#include "cinefit/mri.hpp"

namespace cinefit {

// Integer k-space grid indices -> normalized frequency coordinates in
// [-pi, pi), DC at 0. Index order is DFT natural order (row 0 = DC).
inline std::pair<double, double> normalize_kcoords(int row, int col, int H, int W) {
    check_arg(row >= 0 && row < H && col >= 0 && col < W, "normalize_kcoords: index out of range");
    const double ky = 2.0 * std::numbers::pi * mri::signed_freq(row, H) / H;
    const double kx = 2.0 * std::numbers::pi * mri::signed_freq(col, W) / W;
    return {kx, ky};
}

// Inverse of normalize_kcoords.
inline std::pair<int, int> denormalize_kcoords(double kx, double ky, int H, int W) {
    const int fr = static_cast<int>(std::llround(ky * H / (2.0 * std::numbers::pi)));
    const int fc = static_cast<int>(std::llround(kx * W / (2.0 * std::numbers::pi)));
    return {mri::row_of_freq(fr, H), mri::row_of_freq(fc, W)};
}

// K-space-domain implicit representation: (kx, ky, t) -> 2C reals, one complex
// k-space value per receiver coil from a single forward pass. Spatial scales
// act on the normalized [-pi, pi) coordinates and are dimensionless.
class KFMLPModel {
public:
    FourierFeatures ff;
    MlpStack mlp;  // out_dim = 2C
    int C = 0;
    int H = 0;
    int W = 0;

    static KFMLPModel init(const FourierFeatureConfig& ffc, const MLPConfig& mc, int C, int H,
                           int W, uint64_t weight_seed) {
        check_arg(C >= 1, "kfmlp: C must be >= 1");
        KFMLPModel m;
        m.ff = FourierFeatures::make(ffc);
        m.mlp = MlpStack::init(ffc.feature_dim(), 2 * C, mc, weight_seed);
        m.C = C;
        m.H = H;
        m.W = W;
        return m;
    }

    // Predicted stacked k-space values along the frame's measured coordinates,
    // ordered to compare elementwise against Measurements::frame_data.
    std::vector<Complex> forward_trajectory(const mri::Frame& frame) {
        check_arg(!frame.rows.empty(), "forward_trajectory: frame has no lines");
        assemble_points(frame.rows, frame.t_center);
        const RealArray2& out = mlp.forward(X_);
        return stack_outputs(out, static_cast<int>(frame.rows.size()));
    }

    // Gradient wrt the stacked predictions from the latest forward_trajectory.
    void backward_trajectory(const std::vector<Complex>& dstacked) {
        const int L = X_.rows / W;
        check_dim(static_cast<int>(dstacked.size()) == C * L * W,
                  "backward_trajectory: gradient length");
        unstack_gradient(dstacked, L);
        mlp.backward(X_, dout_);
    }

    // Full-grid evaluation at time t, per-coil inverse FFT, coil combination.
    ComplexImage reconstruct_image(double t, const mri::SensitivityMaps& sens) {
        check_dim(sens.H == H && sens.W == W && sens.C == C, "reconstruct_image: geometry");
        assemble_full_grid(t);
        const RealArray2& out = mlp.forward(Xgrid_);
        std::vector<ComplexArray2> coil_images;
        coil_images.reserve(static_cast<size_t>(C));
        ComplexArray2 k(H, W);
        for (int c = 0; c < C; ++c) {
            for (int n = 0; n < H * W; ++n)
                k.data[static_cast<size_t>(n)] =
                    mlp.cfg.s_out * Complex(out.at(n, 2 * c), out.at(n, 2 * c + 1));
            coil_images.push_back(ifft2(k));
        }
        return mri::combine_coils(coil_images, sens);
    }

    std::vector<Parameter*> params() { return mlp.params(); }

private:
    RealArray2 X_;      // trajectory batch embedding
    RealArray2 Xgrid_;  // full-grid embedding
    RealArray2 dout_;
    RealArray2 grid_spatial_;  // separate mode: cached [sin, cos] spatial features per grid point
    RealArray2 grid_phase_;    // joint mode: cached spatial part of the joint phase
    bool grid_cache_ready_ = false;

    void build_grid_cache() {
        const int ns = ff.cfg.n_spatial;
        if (ff.cfg.mode == EmbeddingMode::separate) {
            grid_spatial_ = RealArray2(H * W, 2 * ns);
            for (int r = 0; r < H; ++r)
                for (int col = 0; col < W; ++col) {
                    const auto [kx, ky] = normalize_kcoords(r, col, H, W);
                    double* row = grid_spatial_.row(r * W + col);
                    const double sx = ff.cfg.s_x * kx, sy = ff.cfg.s_y * ky;
                    for (int i = 0; i < ns; ++i) {
                        const double u = ff.B.at(i, 0) * sx + ff.B.at(i, 1) * sy;
                        row[i] = std::sin(u);
                        row[ns + i] = std::cos(u);
                    }
                }
        } else {
            const int nj = ff.cfg.joint_rows();
            grid_phase_ = RealArray2(H * W, nj);
            for (int r = 0; r < H; ++r)
                for (int col = 0; col < W; ++col) {
                    const auto [kx, ky] = normalize_kcoords(r, col, H, W);
                    double* row = grid_phase_.row(r * W + col);
                    const double sx = ff.cfg.s_x * kx, sy = ff.cfg.s_y * ky;
                    for (int i = 0; i < nj; ++i)
                        row[i] = ff.B_joint.at(i, 0) * sx + ff.B_joint.at(i, 1) * sy;
                }
        }
        grid_cache_ready_ = true;
    }

    // Writes the embedding of grid point `src` at time features tf into `row`.
    void fill_row_separate(int src, const std::vector<double>& tf, double* row) const {
        const int ns = ff.cfg.n_spatial, nt = ff.cfg.n_temporal;
        const double* sp = grid_spatial_.row(src);
        for (int i = 0; i < 2 * ns; ++i) row[i] = sp[i];
        for (int j = 0; j < 2 * nt; ++j) row[2 * ns + j] = tf[static_cast<size_t>(j)];
    }

    void fill_row_joint(int src, double st, double* row) const {
        const int nj = ff.cfg.joint_rows();
        const double* ph = grid_phase_.row(src);
        for (int i = 0; i < nj; ++i) {
            const double w = ph[i] + ff.B_joint.at(i, 2) * st;
            row[i] = std::sin(w);
            row[nj + i] = std::cos(w);
        }
    }

    std::vector<double> temporal_features(double t) const {
        const int nt = ff.cfg.n_temporal;
        std::vector<double> tf(static_cast<size_t>(2 * nt));
        const double st = ff.cfg.s_t * t;
        for (int j = 0; j < nt; ++j) {
            const double v = ff.b[static_cast<size_t>(j)] * st;
            tf[static_cast<size_t>(j)] = std::sin(v);
            tf[static_cast<size_t>(nt + j)] = std::cos(v);
        }
        return tf;
    }

    void assemble_points(const std::vector<int>& rows, double t) {
        if (!grid_cache_ready_) build_grid_cache();
        const int E = ff.cfg.feature_dim();
        const int N = static_cast<int>(rows.size()) * W;
        if (X_.rows != N || X_.cols != E) X_ = RealArray2(N, E);
        if (ff.cfg.mode == EmbeddingMode::separate) {
            const std::vector<double> tf = temporal_features(t);
            for (int l = 0; l < static_cast<int>(rows.size()); ++l)
                for (int col = 0; col < W; ++col)
                    fill_row_separate(rows[static_cast<size_t>(l)] * W + col, tf,
                                      X_.row(l * W + col));
        } else {
            const double st = ff.cfg.s_t * t;
            for (int l = 0; l < static_cast<int>(rows.size()); ++l)
                for (int col = 0; col < W; ++col)
                    fill_row_joint(rows[static_cast<size_t>(l)] * W + col, st, X_.row(l * W + col));
        }
    }

    void assemble_full_grid(double t) {
        if (!grid_cache_ready_) build_grid_cache();
        const int E = ff.cfg.feature_dim();
        const int N = H * W;
        if (Xgrid_.rows != N || Xgrid_.cols != E) Xgrid_ = RealArray2(N, E);
        if (ff.cfg.mode == EmbeddingMode::separate) {
            const std::vector<double> tf = temporal_features(t);
            for (int n = 0; n < N; ++n) fill_row_separate(n, tf, Xgrid_.row(n));
        } else {
            const double st = ff.cfg.s_t * t;
            for (int n = 0; n < N; ++n) fill_row_joint(n, st, Xgrid_.row(n));
        }
    }

    // Network rows are coordinate-major with all coils side by side; the
    // measurement stacking is coil-major.
    std::vector<Complex> stack_outputs(const RealArray2& out, int L) const {
        std::vector<Complex> y(static_cast<size_t>(C) * L * W);
        const double s = mlp.cfg.s_out;
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < L * W; ++i)
                y[static_cast<size_t>(c) * L * W + i] =
                    s * Complex(out.at(i, 2 * c), out.at(i, 2 * c + 1));
        return y;
    }

    void unstack_gradient(const std::vector<Complex>& g, int L) {
        if (dout_.rows != L * W || dout_.cols != 2 * C) dout_ = RealArray2(L * W, 2 * C);
        const double s = mlp.cfg.s_out;
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < L * W; ++i) {
                const Complex z = g[static_cast<size_t>(c) * L * W + i];
                dout_.at(i, 2 * c) = s * z.real();
                dout_.at(i, 2 * c + 1) = s * z.imag();
            }
    }
};

}  // namespace cinefit
