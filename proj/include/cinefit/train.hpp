#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "cinefit/adam.hpp"
#include "cinefit/array.hpp"
#include "cinefit/dataset.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/kfmlp.hpp"
#include "cinefit/metrics.hpp"
#include "cinefit/model.hpp"
#include "cinefit/mri.hpp"
#include "cinefit/rng.hpp"
#include "cinefit/runtime.hpp"

namespace cinefit::train {

enum class LossKind { l2, hdr };
enum class DenoiserExponent { linear, squared };

struct LossConfig {
    LossKind kind = LossKind::l2;
    double epsilon = 1e4;           // HDR dynamic-range offset
    double lambda_denoiser = 0.0;
    double sigma_denoiser = 10.0;
    DenoiserExponent denoiser_exponent = DenoiserExponent::linear;
    double lambda_tv = 0.0;

    void validate() const {
        if (kind == LossKind::hdr) check_arg(epsilon > 0, "loss: hdr epsilon must be > 0");
        check_arg(lambda_denoiser >= 0, "loss: lambda_denoiser must be >= 0");
        check_arg(sigma_denoiser > 0, "loss: sigma_denoiser must be > 0");
        check_arg(lambda_tv >= 0, "loss: lambda_tv must be >= 0");
    }
};

// Squared l2 of the complex residual; gradient 2(pred - meas) per component in
// the (dL/dRe, dL/dIm) convention used throughout.
inline double loss_l2(std::span<const Complex> pred, std::span<const Complex> meas,
                      std::vector<Complex>& grad) {
    check_dim(pred.size() == meas.size(), "loss_l2: length mismatch");
    grad.resize(pred.size());
    double loss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const Complex r = pred[i] - meas[i];
        loss += std::norm(r);
        grad[i] = 2.0 * r;
    }
    return loss;
}

// High-dynamic-range loss ||(pred - meas) / (|sg(pred)| + eps)||^2. The
// denominator uses the detached prediction magnitude: the returned gradient
// treats it as a constant.
inline double loss_hdr(std::span<const Complex> pred, std::span<const Complex> meas, double eps,
                       std::vector<Complex>& grad) {
    check_dim(pred.size() == meas.size(), "loss_hdr: length mismatch");
    check_arg(eps > 0, "loss_hdr: epsilon must be > 0");
    grad.resize(pred.size());
    double loss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = std::abs(pred[i]) + eps;
        const Complex r = pred[i] - meas[i];
        loss += std::norm(r) / (d * d);
        grad[i] = 2.0 * r / (d * d);
    }
    return loss;
}

// Diagonal weight of the k-space denoiser at coordinate distance d from the
// k-space center. The linear exponent matches the printed formula
// exp(-d / (2 sigma^2)); `squared` exposes the conventional Gaussian kernel.
inline double denoiser_weight(double d, double sigma, DenoiserExponent exponent) {
    const double num = exponent == DenoiserExponent::linear ? d : d * d;
    return std::exp(-num / (2.0 * sigma * sigma));
}

// K-space regularizer R = L_HDR(pred, K pred) with the weighted target branch
// detached: residual (1 - w) pred, denominator |pred| + eps, both treated as
// constants by the gradient.
inline double loss_denoiser(std::span<const Complex> pred, std::span<const double> dist,
                            double sigma, double eps, DenoiserExponent exponent,
                            std::vector<Complex>& grad) {
    check_dim(pred.size() == dist.size(), "loss_denoiser: coords/pred length mismatch");
    grad.resize(pred.size());
    double loss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double w = denoiser_weight(dist[i], sigma, exponent);
        const double den = std::abs(pred[i]) + eps;
        const Complex r = (1.0 - w) * pred[i];
        loss += std::norm(r) / (den * den);
        grad[i] = 2.0 * r / (den * den);
    }
    return loss;
}

// Temporal total-variation penalty against the cached neighbor reconstructions:
// l1 on the real and imaginary parts separately, summed. One neighbor at the
// ends of the series, two in the interior. The gradient flows only into the
// current reconstruction; the subgradient at zero residual is 0.
inline double loss_temporal_tv(const ComplexImage& current,
                               const std::vector<const ComplexImage*>& neighbors,
                               ComplexImage& grad) {
    if (!grad.same_shape(current)) grad = ComplexImage(current.rows, current.cols);
    grad.fill(Complex{});
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    double loss = 0.0;
    for (const ComplexImage* nb : neighbors) {
        check_dim(nb->same_shape(current), "loss_temporal_tv: neighbor shape");
        for (size_t i = 0; i < current.size(); ++i) {
            const double dre = current.data[i].real() - nb->data[i].real();
            const double dim = current.data[i].imag() - nb->data[i].imag();
            loss += std::abs(dre) + std::abs(dim);
            grad.data[i] += Complex(sgn(dre), sgn(dim));
        }
    }
    return loss;
}

struct TrainConfig {
    AdamConfig adam;
    LossConfig loss;
    int patience = 200;
    int max_epochs = 0;  // 0 = no cap
    uint64_t frame_seed = 0;

    void validate() const {
        check_arg(patience >= 0, "train: patience must be >= 0");
        loss.validate();
    }
};

struct HistoryRow {
    int epoch = 0;
    double train_loss = 0.0;
    double val_ser_db = 0.0;
    double wallclock_s = 0.0;
};

// Snapshot of all trainable values, in parameter order.
using ParamSnapshot = std::vector<RealArray2>;

inline ParamSnapshot snapshot_params(const std::vector<Parameter*>& params) {
    ParamSnapshot out;
    out.reserve(params.size());
    for (const Parameter* p : params) out.push_back(p->value);
    return out;
}

inline void restore_params(const std::vector<Parameter*>& params, const ParamSnapshot& snap) {
    check_arg(params.size() == snap.size(), "restore_params: parameter count mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        check_dim(params[i]->value.same_shape(snap[i]), "restore_params: shape mismatch");
        params[i]->value = snap[i];
    }
}

struct FitResult {
    ParamSnapshot best_params;
    double best_ser_db = -std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int epochs_run = 0;
    std::vector<HistoryRow> history;
};

// Reconstructions needed for the validation SER: one image per frame that has
// at least one assigned validation line.
template <typename Model>
std::vector<std::vector<Complex>> predict_validation_lines(Model& model, const Dataset& ds) {
    check_arg(!ds.val_lines.empty(), "validation: no validation lines");
    std::map<int, ComplexImage> recon;
    for (const mri::ValidationLine& v : ds.val_lines) {
        if (recon.count(v.frame_index)) continue;
        const double t = ds.binning.frames[static_cast<size_t>(v.frame_index)].t_center;
        if constexpr (std::is_same_v<Model, FMLPModel>)
            recon.emplace(v.frame_index, model.forward_grid(t));
        else
            recon.emplace(v.frame_index, model.reconstruct_image(t, ds.sens));
    }
    std::vector<std::vector<Complex>> lines;
    lines.reserve(ds.val_lines.size());
    for (const mri::ValidationLine& v : ds.val_lines)
        lines.push_back(mri::predict_validation_line(recon.at(v.frame_index), ds.sens, v.ky_row));
    return lines;
}

template <typename Model>
metrics::SerReport validation_ser(Model& model, const Dataset& ds) {
    return metrics::compute_ser(predict_validation_lines(model, ds), ds.meas.val_data);
}

// The epoch loop: per epoch, K steps of batch-size-one stochastic optimization
// with the frame chosen uniformly at random (with replacement), followed by a
// validation SER evaluation. Early stopping keeps the parameters of the best
// SER epoch and halts after `patience` epochs without a new high score.
template <typename Model>
class Trainer {
public:
    Trainer(Model& model, const Dataset& ds, const TrainConfig& cfg)
        : model_(model),
          ds_(ds),
          cfg_(cfg),
          adam_(cfg.adam),
          frame_rng_(Rng::stream(cfg.frame_seed, "train.frames")) {
        cfg_.validate();
        check_arg(ds.n_frames() > 0, "train: dataset has no frames");
        if constexpr (!std::is_same_v<Model, FMLPModel>)
            check_arg(cfg.loss.lambda_tv == 0.0,
                      "train: temporal TV applies to the image-domain model only");
        if (cfg_.loss.lambda_tv > 0.0)
            tv_cache_.resize(static_cast<size_t>(ds.n_frames()));
    }

    double train_epoch() {
        const int K = ds_.n_frames();
        double total = 0.0;
        for (int s = 0; s < K; ++s) {
            const int k = static_cast<int>(frame_rng_.below(static_cast<uint64_t>(K)));
            total += step(k);
        }
        ++epochs_done_;
        if (cfg_.loss.lambda_tv > 0.0 && !tv_ready_) fill_tv_cache();
        const double epoch_loss = total / K;
        if (!std::isfinite(epoch_loss)) throw numeric_error("train: non-finite epoch loss");
        return epoch_loss;
    }

    metrics::SerReport eval_ser() { return validation_ser(model_, ds_); }

    FitResult fit() {
        check_arg(!ds_.val_lines.empty(), "fit: validation lines required for early stopping");
        FitResult res;
        const auto t0 = std::chrono::steady_clock::now();
        int epochs_since_best = 0;
        for (int epoch = 1;; ++epoch) {
            const double loss = train_epoch();
            const metrics::SerReport rep = eval_ser();
            if (std::isnan(rep.ser_db)) throw numeric_error("fit: non-finite validation SER");
            const double wall =
                runtime::deterministic()
                    ? 0.0
                    : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            res.history.push_back(HistoryRow{epoch, loss, rep.ser_db, wall});
            res.epochs_run = epoch;
            if (rep.ser_db > res.best_ser_db) {
                res.best_ser_db = rep.ser_db;
                res.best_epoch = epoch;
                res.best_params = snapshot_params(model_.params());
                epochs_since_best = 0;
            } else {
                ++epochs_since_best;
            }
            if (epochs_since_best >= cfg_.patience) break;
            if (cfg_.max_epochs > 0 && epoch >= cfg_.max_epochs) break;
        }
        restore_params(model_.params(), res.best_params);
        return res;
    }

private:
    Model& model_;
    const Dataset& ds_;
    TrainConfig cfg_;
    AdamConfig adam_;
    Rng frame_rng_;
    int epochs_done_ = 0;

    std::vector<ComplexImage> tv_cache_;
    bool tv_ready_ = false;

    std::vector<Complex> grad_y_, grad_reg_;
    ComplexImage tv_grad_;
    std::map<int, std::vector<double>> frame_dists_;  // per frame, stacked-element k distances

    const std::vector<double>& dists_for(int k) {
        auto it = frame_dists_.find(k);
        if (it != frame_dists_.end()) return it->second;
        const mri::Frame& f = ds_.binning.frames[static_cast<size_t>(k)];
        std::vector<double> d;
        d.reserve(static_cast<size_t>(ds_.C) * f.rows.size() * static_cast<size_t>(ds_.W));
        for (int c = 0; c < ds_.C; ++c)
            for (int row : f.rows)
                for (int col = 0; col < ds_.W; ++col) {
                    const auto [kx, ky] = normalize_kcoords(row, col, ds_.H, ds_.W);
                    d.push_back(std::sqrt(kx * kx + ky * ky));
                }
        return frame_dists_.emplace(k, std::move(d)).first->second;
    }

    double data_loss(std::span<const Complex> pred, std::span<const Complex> meas) {
        if (cfg_.loss.kind == LossKind::l2) return loss_l2(pred, meas, grad_y_);
        return loss_hdr(pred, meas, cfg_.loss.epsilon, grad_y_);
    }

    double step(int k) {
        const mri::Frame& frame = ds_.binning.frames[static_cast<size_t>(k)];
        const std::vector<Complex>& y = ds_.meas.frame_data[static_cast<size_t>(k)];
        double loss = 0.0;
        if constexpr (std::is_same_v<Model, FMLPModel>) {
            const ComplexImage img = model_.forward_grid(frame.t_center);
            const std::vector<Complex> pred = mri::apply_forward(img, ds_.sens, frame.rows);
            loss = data_loss(pred, y);
            if (cfg_.loss.lambda_denoiser > 0.0) {
                loss += cfg_.loss.lambda_denoiser *
                        loss_denoiser(pred, dists_for(k), cfg_.loss.sigma_denoiser,
                                      cfg_.loss.epsilon, cfg_.loss.denoiser_exponent, grad_reg_);
                for (size_t i = 0; i < grad_y_.size(); ++i)
                    grad_y_[i] += cfg_.loss.lambda_denoiser * grad_reg_[i];
            }
            ComplexImage gimg = mri::apply_adjoint(grad_y_, ds_.sens, frame.rows);
            if (cfg_.loss.lambda_tv > 0.0 && tv_ready_) {
                std::vector<const ComplexImage*> neighbors;
                if (k > 0) neighbors.push_back(&tv_cache_[static_cast<size_t>(k - 1)]);
                if (k + 1 < ds_.n_frames()) neighbors.push_back(&tv_cache_[static_cast<size_t>(k + 1)]);
                loss += cfg_.loss.lambda_tv * loss_temporal_tv(img, neighbors, tv_grad_);
                for (size_t i = 0; i < gimg.size(); ++i)
                    gimg.data[i] += cfg_.loss.lambda_tv * tv_grad_.data[i];
            }
            model_.backward_grid(gimg);
            if (cfg_.loss.lambda_tv > 0.0 && tv_ready_) tv_cache_[static_cast<size_t>(k)] = img;
        } else {
            const std::vector<Complex> pred = model_.forward_trajectory(frame);
            loss = data_loss(pred, y);
            if (cfg_.loss.lambda_denoiser > 0.0) {
                loss += cfg_.loss.lambda_denoiser *
                        loss_denoiser(pred, dists_for(k), cfg_.loss.sigma_denoiser,
                                      cfg_.loss.epsilon, cfg_.loss.denoiser_exponent, grad_reg_);
                for (size_t i = 0; i < grad_y_.size(); ++i)
                    grad_y_[i] += cfg_.loss.lambda_denoiser * grad_reg_[i];
            }
            model_.backward_trajectory(grad_y_);
        }
        auto params = model_.params();
        adam_step(params, adam_);
        return loss;
    }

    // The TV cache starts from the first epoch's reconstructions: after epoch 1
    // every frame is rendered once, then the term becomes active.
    void fill_tv_cache() {
        if constexpr (std::is_same_v<Model, FMLPModel>) {
            for (int k = 0; k < ds_.n_frames(); ++k)
                tv_cache_[static_cast<size_t>(k)] =
                    model_.forward_grid(ds_.binning.frames[static_cast<size_t>(k)].t_center);
        }
        tv_ready_ = true;
    }
};

template <typename Model>
FitResult fit(Model& model, const Dataset& ds, const TrainConfig& cfg) {
    Trainer<Model> tr(model, ds, cfg);
    return tr.fit();
}

}  // namespace cinefit::train
