#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/dataset.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/mri.hpp"
#include "cinefit/rng.hpp"

namespace cinefit::phantom {

// Soft-edged ellipse; positions and axes in meters, edge softness is the
// length scale of the sigmoid falloff.
struct Ellipse {
    double cx = 0.0, cy = 0.0;
    double ax = 0.1, ay = 0.1;
    Complex amp{1.0, 0.0};
    double softness = 0.005;
    bool cardiac = false;  // semi-axes follow the cardiac waveform
};

struct PhantomConfig {
    int H = 64, W = 64;
    double fov_x = 0.32, fov_y = 0.32;
    std::vector<Ellipse> ellipses;
    double cardiac_freq = 1.0;  // Hz
    double cardiac_amp = 0.0;   // fractional semi-axis modulation, < 1
    double resp_freq = 0.25;    // Hz
    double resp_amp = 0.0;      // meters of vertical translation
    double phase_ramp_x = 25.0;  // rad/m, makes the image genuinely complex
    double phase_ramp_y = -18.0;
    std::optional<double> noise_snr_db;
    uint64_t seed = 0;

    void validate() const {
        check_arg(H >= 1 && W >= 1, "phantom: empty grid");
        check_arg(cardiac_amp < 1.0, "phantom: cardiac_amp must be < 1");
        check_arg(cardiac_freq > 0 && resp_freq > 0, "phantom: motion frequencies must be > 0");
    }

    double x_at(int col) const { return (col - W / 2) * (fov_x / W); }
    double y_at(int row) const { return (row - H / 2) * (fov_y / H); }
};

// Contraction waveform on [-1, 0]: a raised-cosine pair with a fast descent
// over the first `rise` fraction of the cycle and a slow recovery afterwards.
// C1-periodic.
inline double cardiac_waveform(double phase01, double rise = 0.3) {
    if (phase01 < rise) return -0.5 * (1.0 - std::cos(std::numbers::pi * phase01 / rise));
    return -0.5 * (1.0 + std::cos(std::numbers::pi * (phase01 - rise) / (1.0 - rise)));
}

// Scalar scene evaluation at one spatial point; the pixel-grid renderer and
// the test oracle both go through the ellipse formula written exactly this way.
inline Complex scene_value(const PhantomConfig& cfg, double x, double y, double t) {
    const double phase = t * cfg.cardiac_freq - std::floor(t * cfg.cardiac_freq);
    const double heart_scale = 1.0 + cfg.cardiac_amp * cardiac_waveform(phase);
    const double shift_y = cfg.resp_amp * std::sin(2.0 * std::numbers::pi * cfg.resp_freq * t);
    Complex v{};
    for (const Ellipse& e : cfg.ellipses) {
        const double ax = e.cardiac ? e.ax * heart_scale : e.ax;
        const double ay = e.cardiac ? e.ay * heart_scale : e.ay;
        const double dx = (x - e.cx) / ax;
        const double dy = (y - (e.cy + shift_y)) / ay;
        const double rho = std::sqrt(dx * dx + dy * dy);
        const double m = std::min(ax, ay);
        const double edge = 1.0 / (1.0 + std::exp(-(1.0 - rho) * m / e.softness));
        v += e.amp * edge;
    }
    const double ph = cfg.phase_ramp_x * x + cfg.phase_ramp_y * y;
    return v * Complex(std::cos(ph), std::sin(ph));
}

// Dense render of the motion state at time t; deterministic in (cfg, t).
inline ComplexImage render_image(const PhantomConfig& cfg, double t) {
    cfg.validate();
    ComplexImage img(cfg.H, cfg.W);
    for (int r = 0; r < cfg.H; ++r) {
        const double y = cfg.y_at(r);
        for (int c = 0; c < cfg.W; ++c) img.at(r, c) = scene_value(cfg, cfg.x_at(c), y, t);
    }
    return img;
}

// Default scene: torso-like body, a contracting heart with a blood pool, a
// static blob and a small bright marker. Positions are fractions of the FOV.
inline PhantomConfig default_phantom(int H, int W, double fov = 0.32) {
    PhantomConfig cfg;
    cfg.H = H;
    cfg.W = W;
    cfg.fov_x = cfg.fov_y = fov;
    const double soft = fov / W;
    auto E = [&](double cx, double cy, double ax, double ay, double ar, double ai, bool cardiac) {
        Ellipse e;
        e.cx = cx * fov;
        e.cy = cy * fov;
        e.ax = ax * fov;
        e.ay = ay * fov;
        e.amp = Complex(ar, ai);
        e.softness = soft;
        e.cardiac = cardiac;
        return e;
    };
    cfg.ellipses = {
        E(0.00, 0.02, 0.42, 0.33, 0.50, 0.10, false),   // body
        E(0.09, -0.08, 0.13, 0.155, 0.85, -0.15, true), // heart wall
        E(0.10, -0.09, 0.06, 0.075, -0.45, 0.10, true), // blood pool
        E(-0.17, 0.14, 0.155, 0.11, 0.30, 0.05, false), // static blob
        E(-0.22, -0.19, 0.038, 0.038, 0.90, 0.20, false),
    };
    cfg.cardiac_amp = 0.25;
    return cfg;
}

// Smooth complex coil maps: a baseline plus one Gaussian lobe per coil centered
// around the FOV border, with a gentle per-coil phase ramp. The baseline keeps
// the root-sum-of-squares at or above 0.25 everywhere.
inline mri::SensitivityMaps make_sensitivities(int C, int H, int W, uint64_t seed) {
    check_arg(C >= 1, "make_sensitivities: C must be >= 1");
    mri::SensitivityMaps sens;
    sens.C = C;
    sens.H = H;
    sens.W = W;
    Rng rng = Rng::stream(seed, "sens.maps");
    for (int c = 0; c < C; ++c) {
        const double ang = 2.0 * std::numbers::pi * (c + 0.3 * rng.uniform()) / C;
        const double cx = 0.55 * std::cos(ang);
        const double cy = 0.55 * std::sin(ang);
        const double pa = rng.uniform(-2.0, 2.0);
        const double pb = rng.uniform(-2.0, 2.0);
        const double p0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
        ComplexArray2 map(H, W);
        for (int r = 0; r < H; ++r) {
            const double qy = (r - H / 2) / static_cast<double>(H);
            for (int x = 0; x < W; ++x) {
                const double qx = (x - W / 2) / static_cast<double>(W);
                const double d2 = (qx - cx) * (qx - cx) + (qy - cy) * (qy - cy);
                const double mag = 0.25 + 0.9 * std::exp(-d2 / (2.0 * 0.45 * 0.45));
                const double ph = pa * qx + pb * qy + p0;
                map.at(r, x) = mag * Complex(std::cos(ph), std::sin(ph));
            }
        }
        sens.maps.push_back(std::move(map));
    }
    return sens;
}

// Partial-Fourier line schedule: the sampled band holds all positive-ky rows
// plus enough negative rows to reach `coverage`; each sweep emits a seeded
// random subset of the band in descending ky order; sweeps repeat until
// n_total_lines, with uniform dt_line spacing throughout.
inline mri::LineSchedule make_schedule(int H, int W, double coverage, int n_total_lines,
                                       uint64_t seed, int lines_per_sweep, double dt_line) {
    check_arg(coverage > 0.0 && coverage <= 1.0, "make_schedule: coverage must be in (0,1]");
    check_arg(n_total_lines >= 1, "make_schedule: need at least one line");
    check_arg(dt_line > 0.0, "make_schedule: dt_line must be > 0");
    const int n_band = static_cast<int>(std::llround(coverage * H));
    check_arg(n_band >= 1, "make_schedule: coverage band is empty");
    check_arg(lines_per_sweep >= 1 && lines_per_sweep <= n_band,
              "make_schedule: coverage band smaller than lines per sweep");

    std::vector<int> band_freqs;  // descending ky
    for (int f = H / 2 - 1; f >= H / 2 - n_band; --f) band_freqs.push_back(f);

    mri::LineSchedule sched;
    sched.H = H;
    sched.W = W;
    sched.dt_line = dt_line;
    Rng rng = Rng::stream(seed, "schedule.sweeps");
    int emitted = 0;
    while (emitted < n_total_lines) {
        std::vector<int> picks = rng.sample_without_replacement(n_band, lines_per_sweep);
        std::sort(picks.begin(), picks.end());  // ascending band index = descending ky
        for (int p : picks) {
            if (emitted >= n_total_lines) break;
            const int row = mri::row_of_freq(band_freqs[static_cast<size_t>(p)], H);
            sched.lines.push_back(mri::LineAcq{row, emitted * dt_line});
            ++emitted;
        }
    }
    return sched;
}

// Full synthesis pipeline: split off validation lines, bin the rest, render
// every line from the motion state at its own timestamp, push it through the
// forward operator, and optionally add complex Gaussian noise calibrated to
// noise_snr_db over the whole dataset.
inline Dataset synthesize_dataset(const PhantomConfig& cfg, const mri::LineSchedule& sched,
                                  const mri::SensitivityMaps& sens, int n_lines_per_frame,
                                  double val_fraction, uint64_t split_seed) {
    cfg.validate();
    check_arg(sched.H == cfg.H && sched.W == cfg.W, "synthesize_dataset: geometry mismatch");
    check_arg(sens.H == cfg.H && sens.W == cfg.W, "synthesize_dataset: sensitivity geometry");

    Dataset ds;
    ds.H = cfg.H;
    ds.W = cfg.W;
    ds.C = sens.C;
    ds.fov_x = cfg.fov_x;
    ds.fov_y = cfg.fov_y;
    ds.dt_line = sched.dt_line;
    ds.n_lines_per_frame = n_lines_per_frame;
    ds.sens = sens;

    auto split = mri::extract_validation(sched, val_fraction, split_seed);
    ds.train_sched = std::move(split.first);
    ds.val_lines = std::move(split.second);

    auto synth_line = [&](const mri::LineAcq& a) {
        const ComplexImage img = render_image(cfg, a.t);
        return mri::apply_forward(img, sens, std::vector<int>{a.ky_row});
    };
    for (const mri::LineAcq& a : ds.train_sched.lines) ds.train_line_data.push_back(synth_line(a));
    for (const mri::ValidationLine& v : ds.val_lines)
        ds.val_line_data.push_back(synth_line(mri::LineAcq{v.ky_row, v.t}));

    if (cfg.noise_snr_db) {
        double power = 0.0;
        size_t count = 0;
        for (const auto& line : ds.train_line_data) {
            power += sum_sq(line);
            count += line.size();
        }
        for (const auto& line : ds.val_line_data) {
            power += sum_sq(line);
            count += line.size();
        }
        const double sigma2 = (power / static_cast<double>(count)) /
                              std::pow(10.0, *cfg.noise_snr_db / 10.0);
        const double s = std::sqrt(sigma2 / 2.0);
        Rng noise = Rng::stream(cfg.seed, "phantom.noise");
        auto add_noise = [&](std::vector<Complex>& line) {
            for (Complex& z : line) z += Complex(s * noise.normal(), s * noise.normal());
        };
        for (auto& line : ds.train_line_data) add_noise(line);
        for (auto& line : ds.val_line_data) add_noise(line);
    }

    ds.rebuild_derived();

    ds.has_ground_truth = true;
    for (const mri::Frame& f : ds.binning.frames) ds.gt_frames.push_back(render_image(cfg, f.t_center));
    for (const mri::ValidationLine& v : ds.val_lines) ds.gt_val.push_back(render_image(cfg, v.t));
    return ds;
}

}  // namespace cinefit::phantom
