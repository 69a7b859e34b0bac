#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cinefit/array.hpp"
#include "cinefit/errors.hpp"

namespace cinefit {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step_count = 0;

    void validate() const {
        check_arg(lr > 0, "adam: lr must be positive");
        check_arg(beta1 > 0 && beta1 < 1, "adam: beta1 must be in (0,1)");
        check_arg(beta2 > 0 && beta2 < 1, "adam: beta2 must be in (0,1)");
        check_arg(eps > 0, "adam: eps must be positive");
    }
};

// Standard bias-corrected Adam update, in place. Grads are consumed: they are
// zeroed afterwards so the next backward pass starts a fresh accumulation.
inline void adam_step(const std::vector<Parameter*>& params, AdamConfig& cfg) {
    cfg.validate();
    ++cfg.step_count;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(cfg.step_count));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(cfg.step_count));
    for (Parameter* p : params) {
        const size_t n = p->value.size();
        for (size_t i = 0; i < n; ++i) {
            const double g = p->grad.data[i];
            p->m.data[i] = cfg.beta1 * p->m.data[i] + (1.0 - cfg.beta1) * g;
            p->v.data[i] = cfg.beta2 * p->v.data[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p->m.data[i] / c1;
            const double vhat = p->v.data[i] / c2;
            p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            p->grad.data[i] = 0.0;
        }
    }
}

}  // namespace cinefit
