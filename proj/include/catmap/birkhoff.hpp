#pragma once

// The parabolic skew product T(x, y) = (x + alpha, y + N x + alpha N / 2) on T^2,
// damped Birkhoff sums along its orbits, and the resulting prediction for the
// propagator matrix elements past the Ehrenfest time.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "classical.hpp"
#include "errors.hpp"
#include "lagrangian.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "torus.hpp"

namespace catmap {

struct SkewMap {
    double alpha = 0;
    int N = 2;
    double beta_param = 0; // alpha N / 2

    static SkewMap make(double alpha, int N) { return {alpha, N, alpha * N / 2.0}; }
};

struct SkewPoint {
    double x = 0, y = 0;
};

namespace detail {

// frac(k * a) for integer k, with the rounding error of the product carried separately.
inline double frac_product(double k, double a)
{
    const double p = k * a;
    const double e = std::fma(k, a, -p);
    const double fp = p - std::floor(p);
    return wrap01(fp + e);
}

} // namespace detail

inline SkewPoint skew_apply(const SkewMap& T, const SkewPoint& pt)
{
    return {wrap01(pt.x + T.alpha), wrap01(pt.y + T.N * pt.x + T.beta_param)};
}

// T^m(x, y) = (x + m alpha, y + m^2 N alpha / 2 + m N x) mod 1
inline SkewPoint skew_iterate(const SkewMap& T, const SkewPoint& pt, std::int64_t m)
{
    const double md = double(m);
    const double x = wrap01(pt.x + detail::frac_product(md, T.alpha));
    // m^2 N / 2 is an integer because N is even
    const double k2 = double(m * m) * (T.N / 2);
    const double y = wrap01(pt.y + detail::frac_product(k2, T.alpha) + detail::frac_product(md * T.N, pt.x));
    return {x, y};
}

// F0(u) = exp(-pi cos^2 (1 + i tan) u^2)
inline cplx interference_profile(double theta, double u)
{
    const double c = std::cos(theta);
    return std::exp(-std::numbers::pi * c * c * cplx(1.0, std::tan(theta)) * u * u);
}

struct InterferenceObservable {
    double q0 = 0, p0 = 0;
    double theta = 0;
    double s0 = 0; // p0 - q0 tan
    double h = 1;
    cplx gamma0{1, 0};

    // F0(d / sqrt h) exp(2 i pi q0 d / h) exp(2 i pi y), d = signed circle distance from x to s0
    cplx operator()(const SkewPoint& pt) const
    {
        const double d = circle_signed(pt.x - s0);
        return interference_profile(theta, d / std::sqrt(h)) * cis_turns((long double)q0 * d / h + pt.y);
    }
};

inline InterferenceObservable make_observable(double theta, double q0, double p0, double h)
{
    require_positive_h(h);
    InterferenceObservable f;
    f.q0 = q0;
    f.p0 = p0;
    f.theta = theta;
    f.s0 = p0 - q0 * std::tan(theta);
    f.h = h;
    f.gamma0 = std::numbers::pi * lagrangian_beta(theta);
    return f;
}

// Gaussian damping chi(u) = exp(-gamma0 u^2 / h), optionally recentred.
struct GaussianDamping {
    cplx gamma0{1, 0};
    double h = 1;
    double centre = 0;

    cplx operator()(double u) const { return std::exp(-gamma0 * (u - centre) * (u - centre) / h); }
    // |chi(u)| < tol for |u - centre| > radius(tol)
    double radius(double tol) const { return std::sqrt(-std::log(tol) * h / gamma0.real()); }
};

// sum_{k = k_lo}^{k_hi} chi(k / m) f(T^k(pt)), summed in increasing k.
template <class Obs, class Chi>
cplx damped_birkhoff_sum(const SkewMap& T, const Obs& f, const Chi& chi, const SkewPoint& pt, double m,
                         std::int64_t k_lo, std::int64_t k_hi)
{
    if (!(m >= 1))
        throw Error("damped Birkhoff sum needs m >= 1");
    cplx sum{};
    for (std::int64_t k = k_lo; k <= k_hi; ++k)
        sum += chi(double(k) / m) * f(skew_iterate(T, pt, k));
    return sum;
}

// Gaussian damping: k runs over the window outside which |chi(k / m)| < 1e-14.
template <class Obs>
cplx damped_birkhoff_sum(const SkewMap& T, const Obs& f, const GaussianDamping& chi, const SkewPoint& pt, double m)
{
    const double r = chi.radius(1e-14);
    return damped_birkhoff_sum(T, f, chi, pt, m, std::int64_t(std::floor((chi.centre - r) * m)),
                               std::int64_t(std::ceil((chi.centre + r) * m)));
}

// Classical Birkhoff sum of m + 1 terms, for comparison with the indicator damping.
template <class Obs>
cplx birkhoff_sum(const SkewMap& T, const Obs& f, const SkewPoint& pt, std::int64_t m)
{
    cplx sum{};
    for (std::int64_t k = 0; k <= m; ++k)
        sum += f(skew_iterate(T, pt, k));
    return sum;
}

// ---------------------------------------------------------------------------
// Prediction for <M^n Sigma Phi_src, Sigma Phi_dst>:
//   (D / sqrt(lambda^n)) omega S_{lambda^n}(f_{q0,p0})(s'', 0)
// with (a'', b'') = M^n src reduced to [0,1)^2, s'' = b'' - tan a'', and the unit gauge
//   omega = e^{-i pi N a b} e^{i pi N det(j, v'')} e^{-i pi N a'' s''} e^{2 i pi N (q0 p0 - tan q0^2 / 2)},
// j = M^n src - v''. The first two factors move the propagated packet to v'', the third
// converts T_{v''} L to its explicit form, the last collects the q0-dependent phases.

enum class DampingCentre {
    origin, // chi(k / lambda^n)
    packet, // chi((k + q0 - a'') / lambda^n), centred on the propagated packet
};

struct TheoremParts {
    cplx omega;
    cplx sum;       // damped Birkhoff sum
    double scale;   // lambda^{-n/2}
    double a2 = 0, b2 = 0, s2 = 0;
};

inline TheoremParts theorem_parts(const Sl2IntMatrix& M, int n, double h, const TorusPoint& src, const TorusPoint& dst,
                                  DampingCentre centre = DampingCentre::packet, bool allow_below_threshold = false)
{
    const SpectralData sd = spectral_data(M);
    const int N = torus_dimension(h);
    if (!allow_below_threshold && n < band_threshold(h, sd.lambda))
        throw ThresholdViolation("n below the comparison threshold");
    const long double t = std::tan((long double)sd.theta);
    const Sl2IntMatrix Mn = M.pow(n);
    const long double a1 = (long double)Mn.a * src.q + (long double)Mn.b * src.p;
    const long double b1 = (long double)Mn.c * src.q + (long double)Mn.d * src.p;
    const long double j1 = std::floor(a1), j2 = std::floor(b1);
    const long double a2 = a1 - j1, b2 = b1 - j2;
    const long double s2 = b2 - t * a2;
    const long double q0 = dst.q, p0 = dst.p;
    // all phases in turns, reduced as they are accumulated
    long double turns = -(long double)N * src.q * src.p / 2.0L;
    turns += reduce_turns((long double)N * (j1 * b2 - j2 * a2) / 2.0L);
    turns += -(long double)N * a2 * s2 / 2.0L;
    turns += (long double)N * (q0 * p0 - t * q0 * q0 / 2.0L);
    TheoremParts parts;
    parts.omega = cis_turns(turns);
    parts.a2 = double(a2);
    parts.b2 = double(b2);
    parts.s2 = double(s2);
    parts.scale = std::pow(sd.lambda, -0.5 * n);

    const SkewMap T = SkewMap::make(double(t), N);
    const InterferenceObservable f = make_observable(sd.theta, dst.q, dst.p, h);
    const double m = std::pow(sd.lambda, double(n));
    GaussianDamping chi{f.gamma0, h, 0.0};
    if (centre == DampingCentre::packet)
        chi.centre = double(a2 - q0) / m;
    parts.sum = damped_birkhoff_sum(T, f, chi, {wrap01(double(s2)), 0.0}, m);
    return parts;
}

inline cplx theorem_rhs(const Sl2IntMatrix& M, int n, double h, const TorusPoint& src, const TorusPoint& dst, cplx D,
                        DampingCentre centre = DampingCentre::packet)
{
    const TheoremParts p = theorem_parts(M, n, h, src, dst, centre);
    return D * p.scale * p.omega * p.sum;
}

// D predicted by the Gaussian integral: (4 beta)^{1/4} (1 - i tan)^{-1/2} times the
// limiting unit phase of M^n Phi_{0,0} at its centre.
inline cplx theorem_constant_estimate(const Sl2IntMatrix& M, int n = 30)
{
    const SpectralData sd = spectral_data(M);
    const GaussianState f = propagate_gaussian(M, wavepacket(0, 0, 1.0), n);
    const double beta = lagrangian_beta(sd.theta).real();
    return std::pow(4.0 * beta, 0.25) / std::sqrt(cplx(1.0, -std::tan(sd.theta))) * (f.amp / std::abs(f.amp));
}

struct TheoremCell {
    int N = 0;
    int n = 0;
    TorusPoint src, dst;
    bool below_threshold = false;
    cplx lhs, rhs;
    double residual = 0;
    double bound = 0; // sqrt(h) lambda^{-n/2}
    double ratio() const { return residual / bound; }
};

struct TheoremCase {
    int N = 0;
    int n = 0;
    TorusPoint src, dst;
};

// Least-squares D over a reference batch: minimises sum |lhs - D r|^2.
inline cplx fit_theorem_constant(const Sl2IntMatrix& M, const std::vector<TheoremCase>& batch,
                                 DampingCentre centre = DampingCentre::packet, unsigned threads = 1)
{
    std::vector<cplx> lhs(batch.size()), r(batch.size());
    parallel_for(batch.size(), threads, [&](std::size_t i) {
        const TheoremCase& c = batch[i];
        lhs[i] = matrix_element_exact(M, c.n, c.src, c.dst, c.N);
        r[i] = theorem_rhs(M, c.n, torus_h(c.N), c.src, c.dst, 1.0, centre);
    });
    cplx num{};
    double den = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        num += std::conj(r[i]) * lhs[i];
        den += std::norm(r[i]);
    }
    if (!(den > 0))
        throw Error("degenerate reference batch for the theorem constant");
    return num / den;
}

inline std::vector<TheoremCell> theorem_error_table(const Sl2IntMatrix& M, const std::vector<TheoremCase>& cases, cplx D,
                                                    DampingCentre centre = DampingCentre::packet, unsigned threads = 1)
{
    const double lambda = spectral_data(M).lambda;
    std::vector<TheoremCell> out(cases.size());
    parallel_for(cases.size(), threads, [&](std::size_t i) {
        const TheoremCase& c = cases[i];
        const double h = torus_h(c.N);
        TheoremCell& cell = out[i];
        cell.N = c.N;
        cell.n = c.n;
        cell.src = c.src;
        cell.dst = c.dst;
        cell.bound = std::sqrt(h) * std::pow(lambda, -0.5 * c.n);
        cell.lhs = matrix_element_exact(M, c.n, c.src, c.dst, c.N);
        if (c.n < band_threshold(h, lambda)) {
            cell.below_threshold = true;
            cell.rhs = cplx(std::nan(""), std::nan(""));
            cell.residual = std::nan("");
            return;
        }
        cell.rhs = theorem_rhs(M, c.n, h, c.src, c.dst, D, centre);
        cell.residual = std::abs(cell.lhs - cell.rhs);
    });
    return out;
}

} // namespace catmap
