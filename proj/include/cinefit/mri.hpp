#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/fft.hpp"
#include "cinefit/rng.hpp"

namespace cinefit::mri {

// Complex receiver-coil weightings S_c, entering the forward model as diagonal
// operators. The maps must keep sum_c |S_c|^2 bounded away from zero inside
// the FOV so coil combination stays invertible.
struct SensitivityMaps {
    int C = 0;
    int H = 0;
    int W = 0;
    std::vector<ComplexArray2> maps;
};

// One ky-line acquisition: a full kx row at array row index `ky_row`, read out
// at time t. Row indices are in DFT natural order (DC at row 0).
struct LineAcq {
    int ky_row = 0;
    double t = 0.0;
};

struct LineSchedule {
    int H = 0;
    int W = 0;
    double dt_line = 0.0;
    std::vector<LineAcq> lines;
};

// Array row index <-> signed ky frequency (cycles across the FOV).
inline int signed_freq(int row, int n) { return row < n / 2 ? row : row - n; }
inline int row_of_freq(int f, int n) { return f >= 0 ? f : f + n; }

// A group of consecutively acquired lines treated as one motion state.
// `rows` is the canonical measurement-stacking order: ascending row index,
// stable for repeats.
struct Frame {
    std::vector<int> line_indices;  // indices into the training schedule
    std::vector<int> rows;
    double t_center = 0.0;
};

struct FrameBinning {
    int n_lines = 0;
    std::vector<Frame> frames;
};

struct ValidationLine {
    int ky_row = 0;
    double t = 0.0;
    int frame_index = -1;
};

// Stacked measurement vectors: per frame y_k over (coil, masked row, kx), and
// per validation line over (coil, kx).
struct Measurements {
    std::vector<std::vector<Complex>> frame_data;
    std::vector<std::vector<Complex>> val_data;
};

// y = M F S x for one frame: per coil, weight by the map, take the unitary
// 2-D FFT and keep the requested ky rows; coils are concatenated in index order.
inline std::vector<Complex> apply_forward(const ComplexImage& img, const SensitivityMaps& sens,
                                          const std::vector<int>& rows) {
    check_dim(sens.H == img.rows && sens.W == img.cols, "apply_forward: image/map shape");
    for (int r : rows) check_arg(r >= 0 && r < img.rows, "apply_forward: mask row out of range");
    std::vector<Complex> out;
    out.reserve(static_cast<size_t>(sens.C) * rows.size() * static_cast<size_t>(img.cols));
    ComplexArray2 weighted(img.rows, img.cols);
    for (int c = 0; c < sens.C; ++c) {
        const ComplexArray2& S = sens.maps[static_cast<size_t>(c)];
        for (size_t i = 0; i < img.size(); ++i) weighted.data[i] = S.data[i] * img.data[i];
        const ComplexArray2 k = fft2(weighted);
        for (int r : rows) {
            const Complex* kr = k.row(r);
            out.insert(out.end(), kr, kr + img.cols);
        }
    }
    return out;
}

// Adjoint of apply_forward: zero-filled k-space per coil, unitary inverse FFT,
// conjugate map weighting, summed over coils.
inline ComplexImage apply_adjoint(std::span<const Complex> meas, const SensitivityMaps& sens,
                                  const std::vector<int>& rows) {
    const size_t expected = static_cast<size_t>(sens.C) * rows.size() * static_cast<size_t>(sens.W);
    check_dim(meas.size() == expected, "apply_adjoint: measurement length mismatch");
    ComplexImage acc(sens.H, sens.W);
    ComplexArray2 k(sens.H, sens.W);
    size_t off = 0;
    for (int c = 0; c < sens.C; ++c) {
        k.fill(Complex{});
        for (int r : rows) {
            Complex* kr = k.row(r);
            for (int x = 0; x < sens.W; ++x) kr[x] += meas[off++];
        }
        const ComplexArray2 img = ifft2(k);
        const ComplexArray2& S = sens.maps[static_cast<size_t>(c)];
        for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += std::conj(S.data[i]) * img.data[i];
    }
    return acc;
}

// Groups consecutive training lines n_lines at a time, in acquisition order.
// The frame time is the midpoint of its first and last line timestamps.
inline FrameBinning bin_lines(const LineSchedule& sched, int n_lines) {
    check_arg(n_lines >= 1, "bin_lines: n_lines must be >= 1");
    check_arg(!sched.lines.empty(), "bin_lines: empty schedule");
    FrameBinning out;
    out.n_lines = n_lines;
    const int n = static_cast<int>(sched.lines.size());
    for (int start = 0; start < n; start += n_lines) {
        const int stop = std::min(n, start + n_lines);
        Frame f;
        for (int i = start; i < stop; ++i) f.line_indices.push_back(i);
        std::vector<std::pair<int, int>> keyed;  // (row, schedule index), stable by acquisition
        for (int i : f.line_indices)
            keyed.emplace_back(sched.lines[static_cast<size_t>(i)].ky_row, i);
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        f.line_indices.clear();
        for (const auto& [row, idx] : keyed) {
            f.rows.push_back(row);
            f.line_indices.push_back(idx);
        }
        f.t_center = 0.5 * (sched.lines[static_cast<size_t>(start)].t +
                            sched.lines[static_cast<size_t>(stop - 1)].t);
        out.frames.push_back(std::move(f));
    }
    return out;
}

// Removes round(fraction * N) lines uniformly at random for validation (ties
// in the rounding go to fewer validation lines). Remaining lines keep their
// original timestamps.
inline std::pair<LineSchedule, std::vector<ValidationLine>> extract_validation(
    const LineSchedule& sched, double fraction, uint64_t seed) {
    check_arg(fraction > 0.0 && fraction < 1.0, "extract_validation: fraction must be in (0,1)");
    const int n = static_cast<int>(sched.lines.size());
    check_arg(n > 0, "extract_validation: empty schedule");
    const double target = fraction * n;
    int n_val = static_cast<int>(std::llround(target));
    if (static_cast<double>(n_val) - target == 0.5) --n_val;
    check_arg(n_val < n, "extract_validation: fraction leaves no training lines");

    Rng rng = Rng::stream(seed, "split.validation");
    std::vector<int> picks = rng.sample_without_replacement(n, n_val);
    std::vector<char> is_val(static_cast<size_t>(n), 0);
    for (int p : picks) is_val[static_cast<size_t>(p)] = 1;

    LineSchedule train;
    train.H = sched.H;
    train.W = sched.W;
    train.dt_line = sched.dt_line;
    std::vector<ValidationLine> val;
    for (int i = 0; i < n; ++i) {
        const LineAcq& a = sched.lines[static_cast<size_t>(i)];
        if (is_val[static_cast<size_t>(i)])
            val.push_back(ValidationLine{a.ky_row, a.t, -1});
        else
            train.lines.push_back(a);
    }
    return {std::move(train), std::move(val)};
}

// Each validation line goes to the frame closest in sample time; ties pick the
// earlier frame.
inline void assign_validation(const FrameBinning& binning, std::vector<ValidationLine>& val) {
    check_arg(!binning.frames.empty(), "assign_validation: no frames");
    for (ValidationLine& v : val) {
        int best = 0;
        double best_d = std::abs(v.t - binning.frames[0].t_center);
        for (int k = 1; k < static_cast<int>(binning.frames.size()); ++k) {
            const double d = std::abs(v.t - binning.frames[static_cast<size_t>(k)].t_center);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        v.frame_index = best;
    }
}

// Predicted k-space line for a validation measurement: sensitivity weighting
// and Fourier transform of the reconstruction, then extraction of the ky row.
inline std::vector<Complex> predict_validation_line(const ComplexImage& img,
                                                    const SensitivityMaps& sens, int ky_row) {
    return apply_forward(img, sens, std::vector<int>{ky_row});
}

// SENSE-style combination with known maps: x = sum_c conj(S_c) x_c / sum_c |S_c|^2.
// Keeps the result in the same complex gauge as the underlying image.
inline ComplexImage combine_coils(const std::vector<ComplexArray2>& coil_images,
                                  const SensitivityMaps& sens, double floor = 1e-8) {
    check_dim(static_cast<int>(coil_images.size()) == sens.C, "combine_coils: coil count");
    ComplexImage out(sens.H, sens.W);
    for (size_t p = 0; p < out.size(); ++p) {
        Complex num{};
        double den = 0.0;
        for (int c = 0; c < sens.C; ++c) {
            const Complex s = sens.maps[static_cast<size_t>(c)].data[p];
            num += std::conj(s) * coil_images[static_cast<size_t>(c)].data[p];
            den += std::norm(s);
        }
        if (den < floor)
            throw numeric_error("combine_coils: coil-combination denominator below floor");
        out.data[p] = num / den;
    }
    return out;
}

// No-prior reference: unmeasured frequencies set to zero, per-coil inverse
// FFT, normalized coil combination.
inline ComplexImage zero_filled_reconstruction(std::span<const Complex> meas,
                                               const SensitivityMaps& sens,
                                               const std::vector<int>& rows) {
    const size_t expected = static_cast<size_t>(sens.C) * rows.size() * static_cast<size_t>(sens.W);
    check_dim(meas.size() == expected, "zero_filled_reconstruction: measurement length");
    std::vector<ComplexArray2> coil_images;
    coil_images.reserve(static_cast<size_t>(sens.C));
    ComplexArray2 k(sens.H, sens.W);
    size_t off = 0;
    for (int c = 0; c < sens.C; ++c) {
        k.fill(Complex{});
        for (int r : rows) {
            Complex* kr = k.row(r);
            for (int x = 0; x < sens.W; ++x) kr[x] += meas[off++];
        }
        coil_images.push_back(ifft2(k));
    }
    return combine_coils(coil_images, sens);
}

}  // namespace cinefit::mri
