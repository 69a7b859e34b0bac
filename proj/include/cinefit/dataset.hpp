#pragma once

#include <cstdint>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"
#include "cinefit/mri.hpp"

namespace cinefit {

// In-memory form of the dataset container: raw per-line k-space data plus the
// acquisition bookkeeping needed to rebuild frames. Everything derived
// (binning, stacked frame vectors, validation assignment) is recomputed by
// rebuild_derived(), so a loaded file and a freshly synthesized dataset go
// through the same path.
struct Dataset {
    int H = 0, W = 0, C = 0;
    double fov_x = 0.0, fov_y = 0.0;
    double dt_line = 0.0;
    int n_lines_per_frame = 0;

    mri::LineSchedule train_sched;
    std::vector<mri::ValidationLine> val_lines;
    mri::SensitivityMaps sens;

    // one vector of length C*W per line, coils concatenated in index order
    std::vector<std::vector<Complex>> train_line_data;
    std::vector<std::vector<Complex>> val_line_data;

    bool has_ground_truth = false;
    std::vector<ComplexImage> gt_frames;  // rendered at frame center times
    std::vector<ComplexImage> gt_val;     // rendered at validation line times

    // derived
    mri::FrameBinning binning;
    mri::Measurements meas;

    int n_frames() const { return static_cast<int>(binning.frames.size()); }

    void rebuild_derived() {
        check_arg(n_lines_per_frame >= 1, "dataset: n_lines_per_frame must be >= 1");
        check_arg(train_sched.lines.size() == train_line_data.size(),
                  "dataset: line data count mismatch");
        binning = mri::bin_lines(train_sched, n_lines_per_frame);
        if (!val_lines.empty()) mri::assign_validation(binning, val_lines);
        meas.frame_data.clear();
        meas.frame_data.reserve(binning.frames.size());
        for (const mri::Frame& f : binning.frames) {
            std::vector<Complex> y;
            y.reserve(static_cast<size_t>(C) * f.line_indices.size() * static_cast<size_t>(W));
            for (int c = 0; c < C; ++c) {
                for (int idx : f.line_indices) {
                    const auto& line = train_line_data[static_cast<size_t>(idx)];
                    y.insert(y.end(), line.begin() + static_cast<size_t>(c) * W,
                             line.begin() + static_cast<size_t>(c + 1) * W);
                }
            }
            meas.frame_data.push_back(std::move(y));
        }
        meas.val_data = val_line_data;
    }

    // Time span of the training acquisition window.
    double t_min() const {
        return train_sched.lines.empty() ? 0.0 : train_sched.lines.front().t;
    }
    double t_max() const {
        return train_sched.lines.empty() ? 0.0 : train_sched.lines.back().t;
    }
    std::vector<double> frame_centers() const {
        std::vector<double> out;
        out.reserve(binning.frames.size());
        for (const auto& f : binning.frames) out.push_back(f.t_center);
        return out;
    }
};

}  // namespace cinefit
