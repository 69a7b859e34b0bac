#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cinefit/adam.hpp"
#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/layers.hpp"
#include "cinefit/rng.hpp"
#include "cinefit/runtime.hpp"

namespace cinefit {

enum class EmbeddingMode { separate, joint };

// Configuration of the fixed random Fourier-feature embedding. The projection
// entries are drawn i.i.d. N(0,1) from named streams of `seed` and are never
// updated by training. Coordinate scales multiply the raw coordinates before
// projection and act as bandwidth knobs: larger scale = weaker smoothness
// prior along that axis.
struct FourierFeatureConfig {
    int n_spatial = 256;
    int n_temporal = 64;
    double s_x = 1.0;   // 1/meter (image domain) or dimensionless (k-space domain)
    double s_y = 1.0;
    double s_t = 1.0;   // 1/second
    EmbeddingMode mode = EmbeddingMode::separate;
    uint64_t seed = 0;

    int joint_rows() const { return n_spatial + n_temporal; }
    int feature_dim() const {
        return mode == EmbeddingMode::separate ? 2 * (n_spatial + n_temporal) : 2 * joint_rows();
    }
    void validate() const {
        check_arg(n_spatial >= 1 && n_temporal >= 1, "embedding sizes must be >= 1");
    }
};

// Materialized projection matrices for one embedding config.
struct FourierFeatures {
    FourierFeatureConfig cfg;
    RealArray2 B;        // n_spatial x 2, separate mode
    std::vector<double> b;  // n_temporal, separate mode
    RealArray2 B_joint;  // (n_spatial + n_temporal) x 3, joint mode

    static FourierFeatures make(const FourierFeatureConfig& cfg) {
        cfg.validate();
        FourierFeatures ff;
        ff.cfg = cfg;
        if (cfg.mode == EmbeddingMode::separate) {
            Rng rb = Rng::stream(cfg.seed, "ff.B");
            ff.B = RealArray2(cfg.n_spatial, 2);
            for (double& w : ff.B.data) w = rb.normal();
            Rng rv = Rng::stream(cfg.seed, "ff.b");
            ff.b.resize(static_cast<size_t>(cfg.n_temporal));
            for (double& w : ff.b) w = rv.normal();
        } else {
            Rng rj = Rng::stream(cfg.seed, "ff.B_joint");
            ff.B_joint = RealArray2(cfg.joint_rows(), 3);
            for (double& w : ff.B_joint.data) w = rj.normal();
        }
        return ff;
    }
};

// [sin(B [s_x x, s_y y]), cos(same), sin(b s_t t), cos(same)].
inline void embed_separate(const FourierFeatures& ff, double x, double y, double t, double* out) {
    const int ns = ff.cfg.n_spatial, nt = ff.cfg.n_temporal;
    const double sx = ff.cfg.s_x * x, sy = ff.cfg.s_y * y;
    for (int i = 0; i < ns; ++i) {
        const double u = ff.B.at(i, 0) * sx + ff.B.at(i, 1) * sy;
        out[i] = std::sin(u);
        out[ns + i] = std::cos(u);
    }
    const double st = ff.cfg.s_t * t;
    for (int j = 0; j < nt; ++j) {
        const double v = ff.b[static_cast<size_t>(j)] * st;
        out[2 * ns + j] = std::sin(v);
        out[2 * ns + nt + j] = std::cos(v);
    }
}

// [sin(B_joint [s_x x, s_y y, s_t t]), cos(same)].
inline void embed_joint(const FourierFeatures& ff, double x, double y, double t, double* out) {
    const int nj = ff.cfg.joint_rows();
    const double sx = ff.cfg.s_x * x, sy = ff.cfg.s_y * y, st = ff.cfg.s_t * t;
    for (int i = 0; i < nj; ++i) {
        const double w =
            ff.B_joint.at(i, 0) * sx + ff.B_joint.at(i, 1) * sy + ff.B_joint.at(i, 2) * st;
        out[i] = std::sin(w);
        out[nj + i] = std::cos(w);
    }
}

inline void embed(const FourierFeatures& ff, double x, double y, double t, double* out) {
    if (ff.cfg.mode == EmbeddingMode::separate)
        embed_separate(ff, x, y, t, out);
    else
        embed_joint(ff, x, y, t, out);
}

// Analytic Jacobian of the separate embedding w.r.t. (x, y, t); one column per
// coordinate, feature_dim rows each.
inline void embed_separate_grad(const FourierFeatures& ff, double x, double y, double t,
                                double* dfdx, double* dfdy, double* dfdt) {
    const int ns = ff.cfg.n_spatial, nt = ff.cfg.n_temporal;
    const double sx = ff.cfg.s_x * x, sy = ff.cfg.s_y * y;
    for (int i = 0; i < ns; ++i) {
        const double u = ff.B.at(i, 0) * sx + ff.B.at(i, 1) * sy;
        const double cu = std::cos(u), su = std::sin(u);
        dfdx[i] = cu * ff.B.at(i, 0) * ff.cfg.s_x;
        dfdx[ns + i] = -su * ff.B.at(i, 0) * ff.cfg.s_x;
        dfdy[i] = cu * ff.B.at(i, 1) * ff.cfg.s_y;
        dfdy[ns + i] = -su * ff.B.at(i, 1) * ff.cfg.s_y;
        dfdt[i] = dfdt[ns + i] = 0.0;
    }
    const double st = ff.cfg.s_t * t;
    for (int j = 0; j < nt; ++j) {
        const double v = ff.b[static_cast<size_t>(j)] * st;
        dfdx[2 * ns + j] = dfdx[2 * ns + nt + j] = 0.0;
        dfdy[2 * ns + j] = dfdy[2 * ns + nt + j] = 0.0;
        dfdt[2 * ns + j] = std::cos(v) * ff.b[static_cast<size_t>(j)] * ff.cfg.s_t;
        dfdt[2 * ns + nt + j] = -std::sin(v) * ff.b[static_cast<size_t>(j)] * ff.cfg.s_t;
    }
}

struct MLPConfig {
    int n_hidden = 7;
    int width = 512;
    double sigma_linear = 0.01;
    double s_out = 1.0;

    void validate() const {
        check_arg(n_hidden >= 1, "mlp: n_hidden must be >= 1");
        check_arg(width >= 2, "mlp: width must be >= 2");
        check_arg(sigma_linear >= 0, "mlp: sigma_linear must be >= 0");
        check_arg(s_out > 0, "mlp: s_out must be > 0");
    }
};

// The ReLU MLP trunk shared by the image-domain and k-space-domain models:
// n_hidden blocks of (linear, ReLU, layernorm) followed by a linear output
// layer. Forward caches everything the backward pass needs, buffers are reused
// across steps.
class MlpStack {
public:
    MLPConfig cfg;
    int in_dim = 0;
    int out_dim = 0;
    std::vector<Parameter> weights;  // n_hidden + 1 linear layers
    std::vector<Parameter> biases;
    mutable int64_t rows_evaluated = 0;  // coordinate rows through forward(), for tests

    static MlpStack init(int in_dim, int out_dim, const MLPConfig& cfg, uint64_t seed) {
        cfg.validate();
        check_arg(in_dim >= 1 && out_dim >= 1, "mlp: in/out dims must be >= 1");
        MlpStack s;
        s.cfg = cfg;
        s.in_dim = in_dim;
        s.out_dim = out_dim;
        Rng rw = Rng::stream(seed, "mlp.weights");
        for (int layer = 0; layer <= cfg.n_hidden; ++layer) {
            const int o = layer == cfg.n_hidden ? out_dim : cfg.width;
            const int e = layer == 0 ? in_dim : cfg.width;
            Parameter W(o, e);
            for (double& w : W.value.data) w = cfg.sigma_linear * rw.normal();
            s.weights.push_back(std::move(W));
            s.biases.emplace_back(1, o);
        }
        s.pre_.resize(static_cast<size_t>(cfg.n_hidden));
        s.post_.resize(static_cast<size_t>(cfg.n_hidden));
        s.inv_std_.resize(static_cast<size_t>(cfg.n_hidden));
        return s;
    }

    // X: N x in_dim. Returns the raw output (N x out_dim), without s_out.
    const RealArray2& forward(const RealArray2& X) {
        check_dim(X.cols == in_dim, "mlp forward: input width mismatch");
        rows_evaluated += X.rows;
        const RealArray2* h = &X;
        for (int i = 0; i < cfg.n_hidden; ++i) {
            const size_t k = static_cast<size_t>(i);
            linear_forward(weights[k].value, biases[k].value, *h, pre_[k]);
            relu_forward(pre_[k], relu_scratch_);
            layernorm_forward(relu_scratch_, post_[k], inv_std_[k]);
            h = &post_[k];
        }
        const size_t last = static_cast<size_t>(cfg.n_hidden);
        linear_forward(weights[last].value, biases[last].value, *h, out_);
        return out_;
    }

    // Accumulates parameter gradients; X must be the batch given to forward().
    void backward(const RealArray2& X, const RealArray2& dOut) {
        const size_t last = static_cast<size_t>(cfg.n_hidden);
        const RealArray2& top = cfg.n_hidden > 0 ? post_[last - 1] : X;
        linear_backward(weights[last], biases[last], top, dOut, &dpost_);
        for (int i = cfg.n_hidden - 1; i >= 0; --i) {
            const size_t k = static_cast<size_t>(i);
            layernorm_backward(post_[k], inv_std_[k], dpost_, drelu_);
            relu_backward(pre_[k], drelu_, dpre_);
            const RealArray2& input = i == 0 ? X : post_[k - 1];
            linear_backward(weights[k], biases[k], input, dpre_, i == 0 ? nullptr : &dpost_);
        }
    }

    std::vector<Parameter*> params() {
        std::vector<Parameter*> out;
        for (size_t i = 0; i < weights.size(); ++i) {
            out.push_back(&weights[i]);
            out.push_back(&biases[i]);
        }
        return out;
    }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& w : weights) n += w.value.size();
        for (const auto& b : biases) n += b.value.size();
        return n;
    }

private:
    std::vector<RealArray2> pre_;
    std::vector<RealArray2> post_;
    std::vector<std::vector<double>> inv_std_;
    RealArray2 relu_scratch_;
    RealArray2 out_;
    RealArray2 dpost_, drelu_, dpre_;
};

// Pixel-center spatial coordinates in meters, matched to the Cartesian k-space
// sampling grid; the origin sits at the FOV center plus an optional offset.
struct CoordinateGrid {
    int H = 0;
    int W = 0;
    double fov_x = 0.0;
    double fov_y = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;

    double x_at(int col) const { return (col - W / 2) * (fov_x / W) + origin_x; }
    double y_at(int row) const { return (row - H / 2) * (fov_y / H) + origin_y; }
};

// Image-domain implicit representation: (x, y, t) -> complex intensity,
// evaluated in batch on the fixed spatial grid at one time per call. The
// spatial half of the embedding is grid-constant and cached; only the temporal
// features are refreshed per call.
class FMLPModel {
public:
    FourierFeatures ff;
    MlpStack mlp;
    CoordinateGrid grid;

    static FMLPModel init(const FourierFeatureConfig& ffc, const MLPConfig& mc,
                          const CoordinateGrid& grid, uint64_t weight_seed) {
        FMLPModel m;
        m.ff = FourierFeatures::make(ffc);
        m.mlp = MlpStack::init(ffc.feature_dim(), 2, mc, weight_seed);
        m.grid = grid;
        return m;
    }

    ComplexImage forward_grid(double t) {
        assemble_input(t);
        const RealArray2& out = mlp.forward(X_);
        ComplexImage img(grid.H, grid.W);
        const double s = mlp.cfg.s_out;
        for (int n = 0; n < out.rows; ++n)
            img.data[static_cast<size_t>(n)] = s * Complex(out.at(n, 0), out.at(n, 1));
        return img;
    }

    // dimg holds dL/dRe + i dL/dIm per pixel; accumulates parameter grads for
    // the most recent forward_grid call.
    void backward_grid(const ComplexArray2& dimg) {
        check_dim(dimg.rows == grid.H && dimg.cols == grid.W, "backward_grid: image shape");
        const int n_rows = grid.H * grid.W;
        if (dout_.rows != n_rows || dout_.cols != 2) dout_ = RealArray2(n_rows, 2);
        const double s = mlp.cfg.s_out;
        for (int n = 0; n < n_rows; ++n) {
            dout_.at(n, 0) = s * dimg.data[static_cast<size_t>(n)].real();
            dout_.at(n, 1) = s * dimg.data[static_cast<size_t>(n)].imag();
        }
        mlp.backward(X_, dout_);
    }

    std::vector<Parameter*> params() { return mlp.params(); }

private:
    RealArray2 X_;            // N x feature_dim, assembled per call
    RealArray2 spatial_feats_;  // N x 2 n_spatial (separate mode)
    RealArray2 joint_phase_;    // N x joint_rows: spatial part of the joint phase
    bool grid_cache_ready_ = false;

    void build_grid_cache() {
        const int N = grid.H * grid.W;
        check_arg(N > 0, "forward_grid: empty grid");
        if (ff.cfg.mode == EmbeddingMode::separate) {
            const int ns = ff.cfg.n_spatial;
            spatial_feats_ = RealArray2(N, 2 * ns);
            runtime::parallel_for(grid.H, [&](int lo, int hi) {
                for (int r = lo; r < hi; ++r) {
                    const double sy = ff.cfg.s_y * grid.y_at(r);
                    for (int c = 0; c < grid.W; ++c) {
                        const double sx = ff.cfg.s_x * grid.x_at(c);
                        double* row = spatial_feats_.row(r * grid.W + c);
                        for (int i = 0; i < ns; ++i) {
                            const double u = ff.B.at(i, 0) * sx + ff.B.at(i, 1) * sy;
                            row[i] = std::sin(u);
                            row[ns + i] = std::cos(u);
                        }
                    }
                }
            });
        } else {
            const int nj = ff.cfg.joint_rows();
            joint_phase_ = RealArray2(N, nj);
            runtime::parallel_for(grid.H, [&](int lo, int hi) {
                for (int r = lo; r < hi; ++r) {
                    const double sy = ff.cfg.s_y * grid.y_at(r);
                    for (int c = 0; c < grid.W; ++c) {
                        const double sx = ff.cfg.s_x * grid.x_at(c);
                        double* row = joint_phase_.row(r * grid.W + c);
                        for (int i = 0; i < nj; ++i)
                            row[i] = ff.B_joint.at(i, 0) * sx + ff.B_joint.at(i, 1) * sy;
                    }
                }
            });
        }
        grid_cache_ready_ = true;
    }

    void assemble_input(double t) {
        if (!grid_cache_ready_) build_grid_cache();
        const int N = grid.H * grid.W;
        const int E = ff.cfg.feature_dim();
        const bool fresh = X_.rows != N || X_.cols != E;
        if (fresh) X_ = RealArray2(N, E);
        if (ff.cfg.mode == EmbeddingMode::separate) {
            const int ns = ff.cfg.n_spatial, nt = ff.cfg.n_temporal;
            std::vector<double> tf(static_cast<size_t>(2 * nt));
            const double st = ff.cfg.s_t * t;
            for (int j = 0; j < nt; ++j) {
                const double v = ff.b[static_cast<size_t>(j)] * st;
                tf[static_cast<size_t>(j)] = std::sin(v);
                tf[static_cast<size_t>(nt + j)] = std::cos(v);
            }
            // spatial block persists across calls; only the temporal block is rewritten
            runtime::parallel_for(N, [&](int lo, int hi) {
                for (int n = lo; n < hi; ++n) {
                    double* row = X_.row(n);
                    if (fresh) {
                        const double* sp = spatial_feats_.row(n);
                        for (int i = 0; i < 2 * ns; ++i) row[i] = sp[i];
                    }
                    for (int j = 0; j < 2 * nt; ++j) row[2 * ns + j] = tf[static_cast<size_t>(j)];
                }
            });
        } else {
            const int nj = ff.cfg.joint_rows();
            const double st = ff.cfg.s_t * t;
            runtime::parallel_for(N, [&](int lo, int hi) {
                for (int n = lo; n < hi; ++n) {
                    const double* ph = joint_phase_.row(n);
                    double* row = X_.row(n);
                    for (int i = 0; i < nj; ++i) {
                        const double w = ph[i] + ff.B_joint.at(i, 2) * st;
                        row[i] = std::sin(w);
                        row[nj + i] = std::cos(w);
                    }
                }
            });
        }
    }
};

// init_weights per the module contract: deterministic for a fixed seed.
inline FMLPModel init_fmlp(const FourierFeatureConfig& ffc, const MLPConfig& mc,
                           const CoordinateGrid& grid, uint64_t weight_seed) {
    return FMLPModel::init(ffc, mc, grid, weight_seed);
}

}  // namespace cinefit
