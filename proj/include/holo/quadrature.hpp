#pragma once

// Deterministic 1D quadrature used by the pulse module. Integrands may be
// real or complex valued.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "holo/errors.hpp"

namespace holo::quad {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }

/// Composite Simpson rule on `intervals` (rounded up to even) panels.
template <class F>
auto composite_simpson(F&& f, double a, double b, std::size_t intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    auto sum = f(a) + f(b);
    for (std::size_t i = 1; i < intervals; ++i) {
        const double w = (i % 2 == 1) ? 4.0 : 2.0;
        sum += w * f(a + h * static_cast<double>(i));
    }
    return sum * (h / 3.0);
}

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F, class T>
void gk15(F& f, double a, double b, T& result, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kronrod = fc * kWgk[7];
    T gauss = fc * kWg[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        kronrod += (f1 + f2) * kWgk[j];
        if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
    }
    result = kronrod * h;
    error = magnitude((kronrod - gauss) * h);
}

template <class F, class T>
T adaptive_gk(F& f, double a, double b, double tol, int depth, int& evaluations) {
    T whole{};
    double err = 0.0;
    gk15(f, a, b, whole, err);
    evaluations += 15;
    if (err <= tol || std::abs(b - a) < 1e-14) return whole;
    if (depth <= 0) {
        throw IntegrationError("adaptive quadrature did not converge on [" + std::to_string(a) +
                               ", " + std::to_string(b) + "]");
    }
    const double m = 0.5 * (a + b);
    return adaptive_gk<F, T>(f, a, m, 0.5 * tol, depth - 1, evaluations) +
           adaptive_gk<F, T>(f, m, b, 0.5 * tol, depth - 1, evaluations);
}

}  // namespace detail

/// Globally adaptive (recursive bisection) Gauss-Kronrod 7/15 quadrature to an
/// absolute error bound `tol`.
template <class F>
auto adaptive_gauss_kronrod(F&& f, double a, double b, double tol, int max_depth = 40) {
    using T = decltype(f(a));
    int evaluations = 0;
    return detail::adaptive_gk<F, T>(f, a, b, tol, max_depth, evaluations);
}

}  // namespace holo::quad
