#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cinefit/errors.hpp"

namespace cinefit {

using Complex = std::complex<double>;

struct RealArray2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    RealArray2() = default;
    RealArray2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        check_arg(r >= 0 && c >= 0, "array shape must be nonnegative");
    }

    size_t size() const { return data.size(); }
    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const RealArray2& o) const { return rows == o.rows && cols == o.cols; }
};

struct ComplexArray2 {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> data;  // row-major

    ComplexArray2() = default;
    ComplexArray2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, Complex{}) {
        check_arg(r >= 0 && c >= 0, "array shape must be nonnegative");
    }

    size_t size() const { return data.size(); }
    Complex& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const Complex& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    Complex* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const Complex* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
    void fill(Complex v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const ComplexArray2& o) const { return rows == o.rows && cols == o.cols; }
};

// The complex image series all modules exchange; x_k in the measurement model.
using ComplexImage = ComplexArray2;

// One trainable tensor with its gradient buffer and Adam moment state.
// All four arrays always share one shape; grads are zeroed by the optimizer
// step, so between steps they hold the running accumulation.
struct Parameter {
    RealArray2 value;
    RealArray2 grad;
    RealArray2 m;
    RealArray2 v;

    Parameter() = default;
    explicit Parameter(int r, int c) : value(r, c), grad(r, c), m(r, c), v(r, c) {}
};

inline double sum_sq(const RealArray2& a) {
    double s = 0.0;
    for (double x : a.data) s += x * x;
    return s;
}

inline double sum_sq(const ComplexArray2& a) {
    double s = 0.0;
    for (const Complex& z : a.data) s += std::norm(z);
    return s;
}

inline double sum_sq(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const Complex& z : v) s += std::norm(z);
    return s;
}

inline double max_abs_diff(const ComplexArray2& a, const ComplexArray2& b) {
    check_dim(a.same_shape(b), "max_abs_diff shapes differ");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace cinefit
