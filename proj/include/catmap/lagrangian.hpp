#pragma once

// Damped Lagrangian states on the unstable line xi = tan(theta) x,
//   L(x) = C(h,n) exp(i pi tan x^2 / h) exp(-pi beta x^2 / (h lambda^{2n})),
// their translates, overlaps with wave packets, and the band sums along the line.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "classical.hpp"
#include "errors.hpp"
#include "metaplectic.hpp"
#include "phase.hpp"
#include "torus.hpp"

namespace catmap {

// Spectral data in extended precision, for quantities that cancel to O(lambda^{-4n}).
struct SpectralLD {
    long double lambda = 1, tan = 0, cos2 = 1;
};

inline SpectralLD spectral_ld(const Sl2IntMatrix& M)
{
    require_positive_hyperbolic(M);
    const long double tr = (long double)M.trace();
    const long double lambda = 0.5L * (tr + std::sqrt(tr * tr - 4.0L));
    long double vx, vy;
    if (M.b != 0) {
        vx = (long double)M.b;
        vy = lambda - (long double)M.a;
    } else {
        vx = lambda - (long double)M.d;
        vy = (long double)M.c;
    }
    const long double t = vy / vx;
    return {lambda, t, 1.0L / (1.0L + t * t)};
}

// Damping constant matching the exact metaplectic propagation: the shape of
// M^n Phi_{0,0} is tan + i lambda^{-2n} / cos^2 + O(lambda^{-4n}).
inline cplx lagrangian_beta(double theta)
{
    const double c = std::cos(theta);
    return {1.0 / (c * c), 0.0};
}

// (1 + 2 i tan) / cos^2: the value produced by the kernel with +b xi^2 in its phase.
inline cplx kernel_plus_b_beta(double theta)
{
    const double c = std::cos(theta);
    return cplx(1.0, 2.0 * std::tan(theta)) / (c * c);
}

struct DampedLagrangianState {
    int n = 0;
    double h = 1;
    double theta = 0;
    double lambda = 1;
    cplx beta{1.0, 0.0};
    double a = 0, b = 0; // translation (a', b')
    double C = 1;        // unit-norm constant

    double tan() const { return std::tan(theta); }
    double s() const { return b - tan() * a; }
    double lambda_2n() const { return std::pow(lambda, 2.0 * n); }

    // T_{(a',b')} of the untranslated state.
    GaussianState gaussian() const
    {
        const GaussianState base{cplx(C, 0.0), cplx(tan(), 0.0) + cplx(0.0, 1.0) * beta / lambda_2n(), 0.0, 0.0, h};
        return translate(base, {a, b});
    }
};

inline double lagrangian_constant(double h, int n, double lambda, cplx beta)
{
    // C^4 = 2 Re(beta) / (h lambda^{2n})
    return std::pow(2.0 * beta.real() / (h * std::pow(lambda, 2.0 * n)), 0.25);
}

inline DampedLagrangianState make_lagrangian(const Sl2IntMatrix& M, int n, double h, double a = 0, double b = 0)
{
    require_positive_h(h);
    if (n < 0)
        throw InvalidMatrix("negative time");
    const SpectralData s = spectral_data(M);
    DampedLagrangianState L;
    L.n = n;
    L.h = h;
    L.theta = s.theta;
    L.lambda = s.lambda;
    L.beta = lagrangian_beta(s.theta);
    L.a = a;
    L.b = b;
    L.C = lagrangian_constant(h, n, s.lambda, L.beta);
    return L;
}

inline cplx lagrangian_eval(const DampedLagrangianState& L, double x)
{
    return gaussian_eval(L.gaussian(), x);
}

// ---------------------------------------------------------------------------
// Pointwise comparison of M^n Phi_{0,0} with its Lagrangian approximant
//   amp_n exp(i pi tan x^2 / h) exp(-pi beta x^2 / (h lambda^{2n})).
// Their ratio is exp(-pi u E_n), u = x^2 / h, so the inequality
//   |M f - approx| <= |M f| (1 - exp(-u R))
// holds at x iff |expm1(-pi u E_n)| < 1, with the smallest admissible
// R = -log1p(-|expm1(-pi u E_n)|) / u.

struct PointwiseGrid {
    double lo = -2, hi = 2;
    int count = 401;
};

struct PointwiseReport {
    int n = 0;
    double h = 0;
    double fitted_R = 0;      // smallest R_n valid on the whole grid
    int violations = 0;       // grid points where no R_n works
    double worst_ratio = 0;   // max |expm1(-pi u E_n)|
    double E_abs = 0;         // |E_n|
};

inline lcplx expm1_complex(lcplx z)
{
    const long double a = z.real(), b = z.imag();
    const long double sh = std::sin(b / 2);
    return {std::expm1(a) * std::cos(b) - 2.0L * sh * sh, std::exp(a) * std::sin(b)};
}

// E_n = beta / lambda^{2n} + i (Theta_n - tan), Theta_n = (c + i d) / (a + i b) for M^n.
inline lcplx pointwise_exponent(const Sl2IntMatrix& M, int n, cplx beta)
{
    const SpectralLD s = spectral_ld(M);
    const Sl2IntMatrix Mn = M.pow(n);
    const lcplx theta_n = lcplx((long double)Mn.c, (long double)Mn.d) / lcplx((long double)Mn.a, (long double)Mn.b);
    const long double L2n = std::pow(s.lambda, 2.0L * n);
    const lcplx lb(beta.real(), beta.imag());
    return lb / L2n + lcplx(0, 1) * (theta_n - s.tan);
}

inline PointwiseReport check_pointwise_approx(const Sl2IntMatrix& M, int n, double h, const PointwiseGrid& grid = {},
                                              cplx beta = cplx(0, 0))
{
    require_positive_h(h);
    if (n < 1)
        throw InvalidMatrix("pointwise comparison needs n >= 1");
    if (beta == cplx(0, 0))
        beta = lagrangian_beta(spectral_data(M).theta);
    const lcplx E = pointwise_exponent(M, n, beta);
    PointwiseReport r;
    r.n = n;
    r.h = h;
    r.E_abs = double(std::abs(E));
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < grid.count; ++i) {
        const long double x = grid.count == 1 ? grid.lo : grid.lo + (grid.hi - grid.lo) * (long double)i / (grid.count - 1);
        const long double u = x * x / h;
        if (u == 0)
            continue;
        const long double m = std::abs(expm1_complex(-pi * u * E));
        r.worst_ratio = std::max(r.worst_ratio, double(m));
        if (m >= 1) {
            ++r.violations;
            continue;
        }
        r.fitted_R = std::max(r.fitted_R, double(-std::log1p(-m) / u));
    }
    return r;
}

// Both sides of the inequality at one point, from exact propagation in double precision.
struct PointwiseSides {
    double lhs = 0, rhs = 0;
};

inline PointwiseSides pointwise_sides(const Sl2IntMatrix& M, int n, double h, double x, double R, cplx beta)
{
    const GaussianState f = propagate_gaussian(M, wavepacket(0, 0, h), n);
    const SpectralData s = spectral_data(M);
    const double L2n = std::pow(s.lambda, 2.0 * n);
    const cplx mf = gaussian_eval(f, x);
    const cplx approx = f.amp * cis_turns((long double)std::tan(s.theta) * x * x / (2.0L * h)) *
                        std::exp(-std::numbers::pi * beta * x * x / (h * L2n));
    return {std::abs(mf - approx), std::abs(mf) * -std::expm1(-x * x * R / h)};
}

// Least-squares slope of log(values) against ns.
inline double log_slope(const std::vector<int>& ns, const std::vector<double>& values)
{
    const std::size_t k = ns.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double x = ns[i], y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Closed-form overlap <L_{(a',b')}, Phi_{q,p}> with L_{(a',b')}(x) =
//   C exp(2 i pi (tan x^2/2 + s' x)/h) exp(-pi beta (x - a')^2/(h lambda^{2n})).
// Writing c = 1 - i tan + beta/lambda^{2n}, w = p + i q - s' + i beta a'/lambda^{2n},
//   <L, Phi> = C C_h sqrt(h/c) exp(-pi/h (w^2/c + q^2 - 2 i p q + beta a'^2/lambda^{2n})),
// and with 1/c = kappa + alpha(n), kappa = cos^2 + i sin cos, P = p + i q, eps = i beta a'/lambda^{2n}:
//   A1 = P^2 kappa + q^2 - 2 i p q
//   A2 = (s'^2 - 2 P s') kappa
//   A3 = (2 (P - s') eps + eps^2)(kappa + alpha) + (P - s')^2 alpha
// so that w^2/c + q^2 - 2ipq = A1 + A2 + A3.

struct OverlapTerms {
    cplx A1, A2, A3, alpha;
    cplx prefactor; // C C_h sqrt(h/c) exp(-pi beta a'^2 / (h lambda^{2n}))
    cplx value;
};

inline cplx lagrangian_alpha(double theta, cplx beta, double lambda_2n)
{
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx cc = cplx(1.0, -std::tan(theta)) + beta / lambda_2n;
    return 1.0 / cc - cplx(c * c, s * c);
}

inline OverlapTerms overlap_terms(const DampedLagrangianState& L, double q, double p)
{
    const double th = L.theta, cs = std::cos(th), sn = std::sin(th);
    const double L2n = L.lambda_2n();
    const cplx I(0, 1);
    const cplx kappa(cs * cs, sn * cs);
    const cplx alpha = lagrangian_alpha(th, L.beta, L2n);
    const cplx c = cplx(1.0, -std::tan(th)) + L.beta / L2n;
    const cplx P(p, q);
    const double sp = L.s();
    const cplx eps = I * L.beta * L.a / L2n;
    OverlapTerms t;
    t.alpha = alpha;
    t.A1 = P * P * kappa + q * q - 2.0 * I * p * q;
    t.A2 = (sp * sp - 2.0 * P * sp) * kappa;
    t.A3 = (2.0 * (P - sp) * eps + eps * eps) * (kappa + alpha) + (P - sp) * (P - sp) * alpha;
    t.prefactor = L.C * wavepacket_constant(L.h) * std::sqrt(L.h / c) *
                  std::exp(-std::numbers::pi * L.beta * L.a * L.a / (L.h * L2n));
    const cplx A = t.A1 + t.A2 + t.A3;
    // exp(-pi A / h): modulus and phase separately so that the phase is reduced in turns
    t.value = t.prefactor * std::exp(-std::numbers::pi * A.real() / L.h) * cis_turns(-(long double)A.imag() / (2.0L * L.h));
    return t;
}

// <L_{(a',b')}, Phi_{q,p}>
inline cplx overlap_lagrangian_wavepacket(const DampedLagrangianState& L, double q, double p)
{
    return overlap_terms(L, q, p).value;
}

inline cplx overlap_lagrangian_wavepacket(const DampedLagrangianState& L, const GaussianState& packet)
{
    if (std::abs(L.h - packet.h) > 1e-15 * std::max(L.h, packet.h))
        throw MismatchedH("Lagrangian state and packet carry different h");
    const double ch = wavepacket_constant(packet.h);
    return overlap_lagrangian_wavepacket(L, packet.q, packet.p) * std::conj(packet.amp / ch);
}

// The explicit form as a Gaussian (phase convention of the closed form above).
inline GaussianState explicit_lagrangian_gaussian(const DampedLagrangianState& L)
{
    GaussianState g = L.gaussian();
    // T_{(a',b')} L = exp(i pi (tan a'^2 - a' b')/h) * explicit form
    const long double a = L.a, b = L.b, t = L.tan();
    g.amp *= cis_turns((a * b - t * a * a) / (2.0L * L.h));
    return g;
}

// ---------------------------------------------------------------------------
// The band D_theta around the line p = q tan + s' has perpendicular half-width
// cos(theta)/2, so each vertical lattice column meets it exactly once.

struct BandIndexer {
    double tan = 0;
    double q0 = 0, p0 = 0;
    double s0 = 0;      // p0 - q0 tan
    double s_line = 0;  // s' = b' - tan a'

    // (q0 + m) tan + s' - p0
    long double offset(std::int64_t m) const
    {
        return ((long double)q0 + m) * tan + s_line - p0;
    }
    // unique integer with remainder in ]-1/2, 1/2]
    std::int64_t p(std::int64_t m) const
    {
        return std::int64_t(std::ceil(offset(m) - 0.5L));
    }
    // (q0 + m) tan + s' - p0 - p(m)
    double remainder(std::int64_t m) const { return double(offset(m) - p(m)); }
    bool contains(std::int64_t m, std::int64_t j) const { return j == p(m); }
};

inline BandIndexer band_indexer(double theta, double q0, double p0, double a = 0, double b = 0)
{
    const double t = std::tan(theta);
    return {t, q0, p0, p0 - q0 * t, b - t * a};
}

// Signed circle distance from x to y, representative in ]-1/2, 1/2].
inline double circle_signed_distance(double x, double y)
{
    return circle_signed(x - y);
}

// ---------------------------------------------------------------------------
// Plain wave-packet sums over (q, p) in (q0, p0) + Z^2.

// |sum over (q,p) outside the band of <g, Phi_{q,p}>|, band drawn around the
// line of slope tan through the centre of g.
inline double off_band_tail(const GaussianState& g, double q0, double p0, double tan_theta,
                            double tol = 1e-280, std::int64_t term_cap = kDefaultTermCap)
{
    const GaussianState test = wavepacket(q0, p0, g.h);
    const BandIndexer band{tan_theta, q0, p0, p0 - q0 * tan_theta, g.p - tan_theta * g.q};
    cplx sum{};
    enumerate_lattice(g, test, tol, term_cap, [&](std::int64_t k1, std::int64_t k2) {
        // packet at (q0 - k1, p0 - k2)
        if (band.contains(-k1, -k2))
            return;
        sum += gaussian_overlap(g, wavepacket(q0 - double(k1), p0 - double(k2), g.h));
    });
    return std::abs(sum);
}

struct BandSum {
    cplx value;
    std::int64_t terms = 0;
    double certified_tail = 0;
};

// sum_m <g, Phi_{q0 + m, p0 + p(m)}>, m over the window where the terms exceed tol * |g|.
inline BandSum band_sum(const GaussianState& g, const BandIndexer& band, double tol = 1e-15)
{
    const GaussianState test = wavepacket(band.q0, band.p0, g.h);
    // decay along the column index: |term| <= pref exp(-pi mu dq^2 / h)
    const long double h = g.h;
    const lcplx t1(g.theta.real(), g.theta.imag());
    const lcplx A = t1 + lcplx(0, 1);
    const lcplx K11 = t1 - t1 * t1 / A, K12 = -1.0L + t1 / A, K22 = -1.0L / A;
    const long double Q11 = K11.imag(), Q12 = K12.imag(), Q22 = K22.imag();
    const long double mu = (Q11 * Q22 - Q12 * Q12) / Q22; // min over dp of v^T Q v / dq^2
    const double pref = std::abs(g.amp) * std::abs(test.amp) * std::sqrt(double(h / std::abs(A)));
    const double c = double(std::numbers::pi_v<long double> * mu / h);
    auto tail = [&](double W) { return 2.0 * pref * std::exp(-c * W * W) / -std::expm1(-2.0 * c * W); };
    double W = std::sqrt(std::max(0.0, std::log(std::max(pref, 1e-300) / tol) / c)) + 1.0;
    while (tail(W) > tol * g.norm())
        W *= 1.05;
    const long double centre = (long double)g.q - band.q0;
    const std::int64_t m_lo = std::int64_t(std::ceil(centre - W));
    const std::int64_t m_hi = std::int64_t(std::floor(centre + W));
    BandSum out;
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double q = double((long double)band.q0 + m);
        const double p = double((long double)band.p0 + band.p(m));
        out.value += gaussian_overlap(g, wavepacket(q, p, g.h));
    }
    out.terms = m_hi - m_lo + 1;
    out.certified_tail = tail(W);
    return out;
}

// Lower end of the time range where the band comparison is asserted.
inline double band_threshold(double h, double lambda)
{
    return std::abs(std::log(h)) / (3.0 * std::log(lambda));
}

// M^n Phi_src and the Lagrangian state aligned with it: the same centre M^n src and the
// same unit phase the metaplectic operator attaches at the centre.
struct PropagatedPair {
    GaussianState exact;
    GaussianState lagrangian;
    DampedLagrangianState L;
};

inline PropagatedPair propagated_pair(const Sl2IntMatrix& M, int n, double h, const TorusPoint& src = {})
{
    const GaussianState f0 = propagate_gaussian(M, wavepacket(0, 0, h), n);
    const Sl2IntMatrix Mn = M.pow(n);
    const long double a2 = (long double)Mn.a * src.q + (long double)Mn.b * src.p;
    const long double b2 = (long double)Mn.c * src.q + (long double)Mn.d * src.p;
    PropagatedPair pp;
    pp.exact = propagate_gaussian(M, wavepacket(src.q, src.p, h), n);
    pp.L = make_lagrangian(M, n, h, double(a2), double(b2));
    pp.lagrangian = pp.L.gaussian();
    // Phi_src = exp(-i pi a b / h) T_src Phi_00, and M^n T_src = T_{M^n src} M^n
    pp.lagrangian.amp *= f0.amp / std::abs(f0.amp) * cis_turns(-(long double)src.q * src.p / (2.0L * h));
    return pp;
}

struct BandDifference {
    cplx M_sum, L_sum;
    double difference = 0;
    double bound = 0; // sqrt(h) lambda^{-n/2} + exp(-1/h)
};

inline BandDifference band_difference(const Sl2IntMatrix& M, int n, double h, double q0, double p0,
                                      bool allow_below_threshold = false, const TorusPoint& src = {})
{
    const SpectralData s = spectral_data(M);
    if (!allow_below_threshold && n < band_threshold(h, s.lambda))
        throw ThresholdViolation("n below the band comparison threshold");
    const PropagatedPair pp = propagated_pair(M, n, h, src);
    const BandIndexer band = band_indexer(s.theta, q0, p0, pp.exact.q, pp.exact.p);
    BandDifference d;
    d.M_sum = band_sum(pp.exact, band).value;
    d.L_sum = band_sum(pp.lagrangian, band).value;
    d.difference = std::abs(d.M_sum - d.L_sum);
    d.bound = std::sqrt(h) * std::pow(s.lambda, -0.5 * n) + std::exp(-1.0 / h);
    return d;
}

} // namespace catmap
