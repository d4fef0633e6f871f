#pragma once

// Numerical oracles. Everything here is slow and exists to certify the closed
// forms in metaplectic.hpp; nothing on a production path calls it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "classical.hpp"
#include "errors.hpp"
#include "metaplectic.hpp"
#include "phase.hpp"

namespace catmap {

struct Window {
    double lo = -1, hi = 1;
};

struct QuadratureResult {
    cplx value;
    double error = 0;
    double l1 = 0;
};

inline constexpr double kOracleTolerance = 1e-9;
inline constexpr double kOracleTail = 1e-14;

// Adaptive tanh-sinh on [lo, hi], refined until successive levels agree to
// `tol` relative to the L1 norm of the integrand, or to `abs_tol` when that is larger.
// Nested integrals use separate integrator instances (`depth`).
template <int depth = 0, class F>
QuadratureResult integrate_window(F&& f, Window w, double tol = kOracleTolerance, double abs_tol = 0)
{
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(18);
    double err = 0, l1 = 0;
    std::size_t levels = 0;
    const cplx v = integrator.integrate(f, w.lo, w.hi, 1e-13, &err, &l1, &levels);
    if (!std::isfinite(err) || err > std::max(tol * l1, abs_tol))
        throw QuadratureNonConvergence("tanh-sinh did not reach tolerance");
    return {v, err, l1};
}

// Oscillatory integrands: sum of `pieces` equal sub-windows, each held to `tol`.
template <int depth = 0, class F>
QuadratureResult integrate_split(F&& f, Window w, int pieces, double tol = kOracleTolerance, double abs_tol = 0)
{
    QuadratureResult total{};
    const double step = (w.hi - w.lo) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double lo = w.lo + i * step, hi = i + 1 == pieces ? w.hi : lo + step;
        const QuadratureResult r = integrate_window<depth>(f, {lo, hi}, tol, abs_tol / pieces);
        total.value += r.value;
        total.error += r.error;
        total.l1 += r.l1;
    }
    return total;
}

// Interval outside which |g| < tail * |amp|.
inline Window gaussian_window(const GaussianState& g, double tail = kOracleTail)
{
    const double w = std::sqrt(-std::log(tail) * g.h / (std::numbers::pi * g.theta.imag()));
    return {g.q - w, g.q + w};
}

// Window where the product of two Gaussian envelopes exceeds tail times its peak.
inline Window product_window(const GaussianState& g1, const GaussianState& g2, double tail = kOracleTail)
{
    const double i1 = g1.theta.imag(), i2 = g2.theta.imag();
    const double centre = (i1 * g1.q + i2 * g2.q) / (i1 + i2);
    const double w = std::sqrt(-std::log(tail) * g1.h / (std::numbers::pi * (i1 + i2)));
    return {centre - w, centre + w};
}

inline cplx quad_overlap(const GaussianState& g1, const GaussianState& g2)
{
    require_same_h(g1, g2);
    auto f = [&](double x) { return gaussian_eval(g1, x) * std::conj(gaussian_eval(g2, x)); };
    return integrate_window(f, product_window(g1, g2)).value;
}

// Unitary h-Fourier transform of a sampled function supported (numerically) in w.
template <class F>
cplx fourier_quadrature(F&& f, Window w, double xi, double h)
{
    auto g = [&](double x) { return cis_turns(-(long double)x * xi / h) * f(x); };
    return integrate_window<1>(g, w).value / std::sqrt(h);
}

// Direct evaluation of the propagator integral
//   [M f](x) = (a h)^{-1/2} int exp(2 i pi S(x, xi)/h) F f(xi) d xi,
//   S = (c x^2 - b xi^2 + 2 x xi) / (2 a),
// with F f itself obtained by quadrature over wx. `wxi` bounds the support of F f.
template <class F>
cplx kernel_quadrature_oracle(const Mat2& M, F&& f, Window wx, Window wxi, double x, double h)
{
    require_positive_h(h);
    if (M.a == 0.0)
        throw ZeroACoefficient("kernel needs a != 0");
    auto integrand = [&](double xi) {
        const long double S = ((long double)M.c * x * x - (long double)M.b * xi * xi + 2.0L * x * xi) / (2.0L * M.a);
        return cis_turns(S / h) * fourier_quadrature(f, wx, xi, h);
    };
    const cplx pref = 1.0 / std::sqrt(cplx(M.a * h, 0.0));
    return pref * integrate_window(integrand, wxi).value;
}

// Oracle for a Gaussian input: windows derived from its envelope and its Fourier envelope.
inline cplx kernel_quadrature_oracle(const Mat2& M, const GaussianState& g, double x)
{
    const GaussianState gh = h_fourier_gaussian(g);
    auto f = [&](double y) { return gaussian_eval(g, y); };
    return kernel_quadrature_oracle(M, f, gaussian_window(g), gaussian_window(gh), x, g.h);
}

} // namespace catmap
