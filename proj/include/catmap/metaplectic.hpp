#pragma once

// Quantization on the line. Gaussian states
//   g(x) = amp * exp(i pi Theta (x-q)^2 / h) * exp(2 i pi p (x-q) / h),  Im Theta > 0
// are closed under quantum translations and the metaplectic action, so every
// operation here is exact algebra on (amp, Theta, q, p).

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "classical.hpp"
#include "errors.hpp"
#include "phase.hpp"

namespace catmap {

struct GaussianState {
    cplx amp{1.0, 0.0};
    cplx theta{0.0, 1.0};
    double q = 0, p = 0;
    double h = 1;

    double norm_sq() const
    {
        return std::norm(amp) * std::sqrt(h / (2.0 * theta.imag()));
    }
    double norm() const { return std::sqrt(norm_sq()); }
    bool normalized() const { return std::abs(norm_sq() - 1.0) < 1e-12; }

    GaussianState scaled(cplx s) const
    {
        GaussianState g = *this;
        g.amp *= s;
        return g;
    }
};

struct PlaneTranslation {
    double a = 0, b = 0;
};

inline void require_positive_h(double h)
{
    if (!(h > 0) || !std::isfinite(h))
        throw NonPositiveH("h must be positive and finite");
}

inline void require_same_h(const GaussianState& g1, const GaussianState& g2)
{
    if (std::abs(g1.h - g2.h) > 1e-15 * std::max(g1.h, g2.h))
        throw MismatchedH("states carry different h");
}

inline double wavepacket_constant(double h)
{
    return std::pow(2.0 / h, 0.25);
}

inline GaussianState wavepacket(double q, double p, double h)
{
    require_positive_h(h);
    return {cplx(wavepacket_constant(h), 0.0), cplx(0.0, 1.0), q, p, h};
}

inline cplx gaussian_eval(const GaussianState& g, double x)
{
    const long double y = (long double)x - g.q;
    const long double y2 = y * y;
    const long double turns = ((long double)g.theta.real() * y2 / 2.0L + (long double)g.p * y) / g.h;
    const double decay = std::exp(-std::numbers::pi * g.theta.imag() * double(y2) / g.h);
    return g.amp * decay * cis_turns(turns);
}

// u -> exp(-i pi a b / h) exp(2 i pi b x / h) u(x - a)
template <class F>
cplx translate_apply(F&& u, const PlaneTranslation& v, double h, double x)
{
    const long double turns = (-(long double)v.a * v.b / 2.0L + (long double)v.b * x) / h;
    return cis_turns(turns) * u(x - v.a);
}

// Acting on the standard form, the prefactor is exp(+i pi a b/h) exp(2 i pi b q/h).
inline GaussianState translate(const GaussianState& g, const PlaneTranslation& v)
{
    GaussianState r = g;
    const long double turns = ((long double)v.a * v.b / 2.0L + (long double)v.b * g.q) / g.h;
    r.amp *= cis_turns(turns);
    r.q = g.q + v.a;
    r.p = g.p + v.b;
    return r;
}

// T_{v1} T_{v2} = phase * T_{v1+v2}
inline cplx compose_translation_phase(const PlaneTranslation& v1, const PlaneTranslation& v2, double h)
{
    require_positive_h(h);
    const long double det = (long double)v1.a * v2.b - (long double)v1.b * v2.a;
    return cis_turns(-det / (2.0L * h));
}

// Square root of z continued along a path; `prev` is the previous value of the root.
inline cplx continued_sqrt(cplx z, cplx prev)
{
    cplx r = std::sqrt(z);
    if (std::abs(r - prev) > std::abs(r + prev))
        r = -r;
    return r;
}

// (a_t + b_t Theta)^{1/2} followed continuously from t = 0 along the flow of H.
inline cplx flow_root(const QuadraticHamiltonian& H, double t, cplx theta)
{
    const int steps = 64 + int(64.0 * std::abs(t) * (1.0 + std::abs(H.alpha) + std::abs(H.beta) + std::abs(H.gamma)));
    cplx root{1.0, 0.0};
    for (int k = 1; k <= steps; ++k) {
        const FlowCoefficients F = flow_coefficients(H, t * double(k) / steps);
        root = continued_sqrt(F.a + F.b * theta, root);
    }
    return root;
}

namespace detail {

// Image of a state under a linear map, given the branch of (a + b Theta)^{1/2}.
inline GaussianState propagate_with_root(const Mat2& M, const GaussianState& g, cplx root)
{
    const cplx den = M.a + M.b * g.theta;
    GaussianState r;
    r.h = g.h;
    r.theta = (M.c + M.d * g.theta) / den;
    // g = amp * e^{-i pi q p/h} T_{(q,p)} g0 with g0 centered; equivariance moves the centre
    const long double q2 = (long double)M.a * g.q + (long double)M.b * g.p;
    const long double p2 = (long double)M.c * g.q + (long double)M.d * g.p;
    const long double turns = (q2 * p2 - (long double)g.q * g.p) / (2.0L * g.h);
    r.amp = g.amp / root * cis_turns(turns);
    r.q = double(q2);
    r.p = double(p2);
    return r;
}

} // namespace detail

// Metaplectic image along the Hamiltonian flow at time t (branch by continuity from t = 0).
inline GaussianState propagate_gaussian(const QuadraticHamiltonian& H, double t, const GaussianState& g)
{
    const FlowCoefficients F = flow_coefficients(H, t);
    if (F.a == 0.0)
        throw ZeroACoefficient("flow coefficient a vanishes");
    return detail::propagate_with_root(F.matrix(), g, flow_root(H, t, g.theta));
}

// Metaplectic image for a real SL(2) matrix, principal branch of (a + b Theta)^{1/2}.
inline GaussianState propagate_gaussian(const Mat2& M, const GaussianState& g)
{
    if (M.a == 0.0)
        throw ZeroACoefficient("matrix coefficient a vanishes");
    return detail::propagate_with_root(M, g, std::sqrt(M.a + M.b * g.theta));
}

// Integer matrix: branch fixed by the flow of its logarithm when the trace exceeds 2.
inline GaussianState propagate_gaussian(const Sl2IntMatrix& M, const GaussianState& g, int n = 1)
{
    if (M.trace() > 2)
        return propagate_gaussian(hamiltonian_from_matrix(M), double(n), g);
    const Sl2IntMatrix Mn = M.pow(n);
    return propagate_gaussian(Mn.real(), g);
}

// <g1, g2> = int g1(x) conj(g2(x)) dx
inline cplx gaussian_overlap(const GaussianState& g1, const GaussianState& g2)
{
    require_same_h(g1, g2);
    const long double h = g1.h;
    const lcplx t1(g1.theta.real(), g1.theta.imag());
    const lcplx t2c(g2.theta.real(), -g2.theta.imag());
    const long double dq = (long double)g1.q - g2.q;
    const long double dp = (long double)g1.p - g2.p;
    // exponent (i pi / h) (A y^2 + B y + C) with y = x - q2
    const lcplx A = t1 - t2c;
    const lcplx B = -2.0L * t1 * dq + 2.0L * dp;
    const lcplx C = t1 * dq * dq - 2.0L * dp * dq;
    const lcplx E = C - B * B / (4.0L * A);
    const long double pi = std::numbers::pi_v<long double>;
    const double decay = double(std::exp(-pi * E.imag() / h));
    const long double turns = E.real() / (2.0L * h) - (long double)g2.p * dq / h;
    // sqrt(h / (-i A)) with -i A = Im A - i Re A in the right half plane
    const cplx pref = std::sqrt(double(h) / cplx(double(A.imag()), double(-A.real())));
    return g1.amp * std::conj(g2.amp) * pref * decay * cis_turns(turns);
}

// Unitary h-Fourier transform, F f(xi) = h^{-1/2} int exp(-2 i pi x xi / h) f(x) dx.
inline GaussianState h_fourier_gaussian(const GaussianState& g)
{
    GaussianState r;
    r.h = g.h;
    r.theta = -1.0 / g.theta;
    r.q = g.p;
    r.p = -g.q;
    const cplx mi_theta(g.theta.imag(), -g.theta.real());
    r.amp = g.amp / std::sqrt(mi_theta) * cis_turns(-(long double)g.q * g.p / g.h);
    return r;
}

// Residual |i hbar u_t - H u| for u = a_t^{-1/2} exp((i/hbar)(c x^2 + 2 x xi + kappa b xi^2)/(2 a)),
// the plane-wave solution with kappa = -1. kappa = +1 evaluates the other sign for comparison.
inline double schrodinger_residual(const QuadraticHamiltonian& H, double t, double x, double xi, double h,
                                   double kappa = -1.0)
{
    require_positive_h(h);
    const double hbar = h / (2.0 * std::numbers::pi);
    const FlowCoefficients F = flow_coefficients(H, t);
    const double a = F.a, b = F.b, c = F.c, d = F.d;
    if (!(a > 0))
        throw ZeroACoefficient("residual requires a_t > 0");
    // coefficient ODEs
    const double da = H.gamma * a + H.beta * c;
    const double db = H.gamma * b + H.beta * d;
    const double dc = -H.alpha * a - H.gamma * c;
    const double num = c * x * x + 2.0 * x * xi + kappa * b * xi * xi;
    const double S = num / (2.0 * a);
    const double dnum = dc * x * x + kappa * db * xi * xi;
    const double St = dnum / (2.0 * a) - da * num / (2.0 * a * a);
    const double Sx = (c * x + xi) / a;
    const double Sxx = c / a;
    const cplx I(0.0, 1.0);
    const cplx u = std::pow(a, -0.5) * std::exp(I * S / hbar);
    const cplx ut = (-da / (2.0 * a) + I * St / hbar) * u;
    const cplx ux = (I * Sx / hbar) * u;
    const cplx uxx = (I * Sxx / hbar - Sx * Sx / (hbar * hbar)) * u;
    // Weyl quantization of alpha x^2/2 + gamma x xi + beta xi^2/2 with xi -> -i hbar d/dx
    const cplx Hu = 0.5 * H.alpha * x * x * u - I * hbar * H.gamma * (x * ux + 0.5 * u) -
                    0.5 * H.beta * hbar * hbar * uxx;
    return std::abs(I * hbar * ut - Hu);
}

} // namespace catmap
