#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"

namespace cinefit::metrics {

// Hold-out data-consistency report. Energies are summed over all lines before
// the ratio is taken, never averaged per line.
struct SerReport {
    double ser_db = 0.0;
    double signal_energy = 0.0;
    double error_energy = 0.0;
    int n_lines = 0;
    bool infinite = false;  // zero error energy; ser_db holds +inf sentinel
};

inline SerReport compute_ser(const std::vector<std::vector<Complex>>& predicted,
                             const std::vector<std::vector<Complex>>& measured) {
    check_arg(!measured.empty(), "compute_ser: need at least one line");
    check_dim(predicted.size() == measured.size(), "compute_ser: line count mismatch");
    SerReport rep;
    rep.n_lines = static_cast<int>(measured.size());
    for (size_t v = 0; v < measured.size(); ++v) {
        check_dim(predicted[v].size() == measured[v].size(), "compute_ser: line length mismatch");
        for (size_t i = 0; i < measured[v].size(); ++i) {
            rep.signal_energy += std::norm(measured[v][i]);
            rep.error_energy += std::norm(predicted[v][i] - measured[v][i]);
        }
    }
    if (rep.error_energy == 0.0) {
        rep.infinite = true;
        rep.ser_db = std::numeric_limits<double>::infinity();
    } else {
        rep.ser_db = 10.0 * std::log10(rep.signal_energy / rep.error_energy);
    }
    return rep;
}

namespace detail {

inline std::vector<double> gaussian_window_1d(int size, double sigma) {
    std::vector<double> w(static_cast<size_t>(size));
    const int half = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - half;
        w[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<size_t>(i)];
    }
    for (double& x : w) x /= sum;
    return w;
}

// Separable weighted local mean over valid positions only; out has shape
// (rows - size + 1) x (cols - size + 1).
inline RealArray2 gaussian_filter_valid(const RealArray2& img, const std::vector<double>& w) {
    const int size = static_cast<int>(w.size());
    const int oh = img.rows - size + 1, ow = img.cols - size + 1;
    RealArray2 tmp(img.rows, ow);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int j = 0; j < size; ++j) s += w[static_cast<size_t>(j)] * img.at(r, c + j);
            tmp.at(r, c) = s;
        }
    RealArray2 out(oh, ow);
    for (int r = 0; r < oh; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int j = 0; j < size; ++j) s += w[static_cast<size_t>(j)] * tmp.at(r + j, c);
            out.at(r, c) = s;
        }
    return out;
}

}  // namespace detail

// Mean local SSIM of two magnitude images: 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range L = max of the reference image, windows
// restricted to fully valid positions.
inline double compute_ssim(const RealArray2& recon, const RealArray2& truth, int window = 11,
                           double sigma = 1.5) {
    check_dim(recon.same_shape(truth), "compute_ssim: shape mismatch");
    check_arg(recon.rows >= window && recon.cols >= window,
              "compute_ssim: image smaller than the window");
    double L = 0.0;
    for (double x : truth.data) L = std::max(L, x);
    check_arg(L > 0.0, "compute_ssim: zero dynamic range");
    const double c1 = (0.01 * L) * (0.01 * L);
    const double c2 = (0.03 * L) * (0.03 * L);

    const std::vector<double> w = detail::gaussian_window_1d(window, sigma);
    RealArray2 xx(recon.rows, recon.cols), yy(recon.rows, recon.cols), xy(recon.rows, recon.cols);
    for (size_t i = 0; i < recon.size(); ++i) {
        xx.data[i] = recon.data[i] * recon.data[i];
        yy.data[i] = truth.data[i] * truth.data[i];
        xy.data[i] = recon.data[i] * truth.data[i];
    }
    const RealArray2 mx = detail::gaussian_filter_valid(recon, w);
    const RealArray2 my = detail::gaussian_filter_valid(truth, w);
    const RealArray2 mxx = detail::gaussian_filter_valid(xx, w);
    const RealArray2 myy = detail::gaussian_filter_valid(yy, w);
    const RealArray2 mxy = detail::gaussian_filter_valid(xy, w);

    double total = 0.0;
    for (size_t i = 0; i < mx.size(); ++i) {
        const double ux = mx.data[i], uy = my.data[i];
        const double vx = mxx.data[i] - ux * ux;
        const double vy = myy.data[i] - uy * uy;
        const double cov = mxy.data[i] - ux * uy;
        const double num = (2.0 * ux * uy + c1) * (2.0 * cov + c2);
        const double den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
        total += num / den;
    }
    return total / static_cast<double>(mx.size());
}

inline RealArray2 magnitude(const ComplexArray2& img) {
    RealArray2 out(img.rows, img.cols);
    for (size_t i = 0; i < img.size(); ++i) out.data[i] = std::abs(img.data[i]);
    return out;
}

}  // namespace cinefit::metrics
