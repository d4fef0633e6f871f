#pragma once

// The quantized torus H^N, N = 1/h even. A symmetrized state
//   Sigma g = sum_k T_k g,  k in Z^2
// is a Dirac comb on (1/N)Z with N-periodic weights; it is stored through its
// Fourier data d_n = sum_m ghat(n + mN), n = 0..N-1, where
// ghat(xi) = int g(x) exp(-2 i pi xi x) dx. With this normalization
//   <Sigma g1, Sigma g2> = sum_k <T_k g1, g2> = sum_n d1_n conj(d2_n).

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "classical.hpp"
#include "errors.hpp"
#include "metaplectic.hpp"
#include "parallel.hpp"
#include "phase.hpp"

namespace catmap {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kTailTolerance = 1e-13;
inline constexpr std::int64_t kDefaultTermCap = 100'000'000;

struct TorusState {
    int N = 0;
    std::vector<cplx> coeffs;

    cplx inner(const TorusState& other) const
    {
        if (other.N != N)
            throw MismatchedH("torus states of different dimension");
        cplx s{};
        for (int n = 0; n < N; ++n)
            s += coeffs[n] * std::conj(other.coeffs[n]);
        return s;
    }
    double norm_sq() const
    {
        double s = 0;
        for (const cplx& c : coeffs)
            s += std::norm(c);
        return s;
    }
    CVector vector() const { return Eigen::Map<const CVector>(coeffs.data(), N); }
    static TorusState from_vector(const CVector& v)
    {
        TorusState s;
        s.N = int(v.size());
        s.coeffs.assign(v.data(), v.data() + v.size());
        return s;
    }
};

struct LatticeTruncation {
    double radius = 0;           // ellipse (or interval) radius in the decay metric
    std::int64_t terms = 0;      // number of lattice terms summed
    double certified_tail = 0;   // bound on the discarded part
    double scale = 0;            // norm scale the tail is measured against
};

struct LatticeSum {
    cplx value;
    LatticeTruncation truncation;
};

// N = 1/h, which must be an even integer.
inline int torus_dimension(double h)
{
    require_positive_h(h);
    const double inv = 1.0 / h;
    const long long N = std::llround(inv);
    if (N < 1 || std::abs(inv - double(N)) > 1e-9 * inv)
        throw OddN("1/h must be an integer");
    if (N % 2 != 0)
        throw OddN("N = 1/h must be even");
    return int(N);
}

inline double torus_h(int N)
{
    if (N < 2 || N % 2 != 0)
        throw OddN("N must be a positive even integer");
    return 1.0 / N;
}

// Lattice enumeration for sums of overlaps <T_k g, test> or <g, Phi_{test - k}>.
// Visits every k in Z^2 with v^T Q v <= R^2, v = (g.q + k1 - test.q, g.p + k2 - test.p),
// where Q is the imaginary part of the overlap exponent; R is chosen so that the
// skipped terms sum to less than `tol` * |g| |test|. Order: k1, then k2, ascending.
template <class Visit>
LatticeTruncation enumerate_lattice(const GaussianState& g, const GaussianState& test, double tol,
                                    std::int64_t term_cap, Visit&& visit)
{
    require_same_h(g, test);
    torus_dimension(g.h);
    const long double h = g.h;
    const lcplx t1(g.theta.real(), g.theta.imag());
    const lcplx A = t1 - lcplx(test.theta.real(), -test.theta.imag());
    const lcplx K11 = t1 - t1 * t1 / A;
    const lcplx K12 = -1.0L + t1 / A;
    const lcplx K22 = -1.0L / A;
    const long double Q11 = K11.imag(), Q12 = K12.imag(), Q22 = K22.imag();
    const long double detQ = Q11 * Q22 - Q12 * Q12;
    if (!(Q11 > 0 && Q22 > 0 && detQ > 0))
        throw TruncationOverflow("overlap form is not positive definite");
    const long double big = 0.5L * (Q11 + Q22 + std::sqrt((Q11 - Q22) * (Q11 - Q22) + 4 * Q12 * Q12));
    const long double mu = detQ / big;

    // |term| = pref * exp(-pi v^T Q v / h); outside the ellipse the sum is at most
    // pref * exp(-pi R^2 / (2h)) * (2 + sqrt(2h / mu))^2
    const double pref = std::abs(g.amp) * std::abs(test.amp) * std::sqrt(double(h / std::abs(A)));
    const double scale = g.norm() * test.norm();
    const double lattice = std::pow(2.0 + std::sqrt(double(2 * h / mu)), 2);
    const double ratio = pref * lattice / (0.5 * tol * std::max(scale, 1e-300));
    const long double R2 = ratio > 1 ? 2.0L * h / std::numbers::pi_v<long double> * std::log((long double)ratio) : 0.0L;
    const double tail = pref * lattice * std::exp(-std::numbers::pi * double(R2 / (2 * h)));

    const long double x = (long double)g.q - test.q;
    const long double y = (long double)g.p - test.p;
    const long double dq_max = std::sqrt(R2 * Q22 / detQ);
    const std::int64_t k1_lo = std::int64_t(std::ceil(-dq_max - x));
    const std::int64_t k1_hi = std::int64_t(std::floor(dq_max - x));

    std::int64_t terms = 0;
    for (std::int64_t k1 = k1_lo; k1 <= k1_hi; ++k1) {
        const long double dq = x + k1;
        const long double disc = Q12 * Q12 * dq * dq - Q22 * (Q11 * dq * dq - R2);
        if (disc < 0)
            continue;
        const long double s = std::sqrt(disc);
        const std::int64_t k2_lo = std::int64_t(std::ceil((-Q12 * dq - s) / Q22 - y));
        const std::int64_t k2_hi = std::int64_t(std::floor((-Q12 * dq + s) / Q22 - y));
        if (k2_hi < k2_lo)
            continue;
        terms += k2_hi - k2_lo + 1;
        if (terms > term_cap)
            throw TruncationOverflow("lattice sum needs more than " + std::to_string(term_cap) + " terms");
        for (std::int64_t k2 = k2_lo; k2 <= k2_hi; ++k2)
            visit(k1, k2);
    }
    return {double(std::sqrt(R2)), terms, tail, scale};
}

// sum_{k in Z^2} <T_k g, test>, the H^N pairing of Sigma g with Sigma test.
inline LatticeSum pair_symmetrized_detail(const GaussianState& g, const GaussianState& test,
                                          std::int64_t term_cap = kDefaultTermCap)
{
    LatticeSum out;
    cplx sum{};
    out.truncation = enumerate_lattice(g, test, kTailTolerance, term_cap, [&](std::int64_t k1, std::int64_t k2) {
        sum += gaussian_overlap(translate(g, {double(k1), double(k2)}), test);
    });
    out.value = sum;
    return out;
}

inline cplx pair_symmetrized(const GaussianState& g, const GaussianState& test)
{
    return pair_symmetrized_detail(g, test).value;
}

// d_n = sqrt(h) sum_m (F_h g)(h n + m), truncated where the Fourier envelope
// falls below kTailTolerance of its peak.
inline TorusState torus_coefficients(const GaussianState& g, LatticeTruncation* info = nullptr)
{
    const int N = torus_dimension(g.h);
    const GaussianState f = h_fourier_gaussian(g);
    const double c = std::numbers::pi * f.theta.imag() / g.h;
    // two-sided tail bound 2 exp(-c W^2) / (1 - exp(-2 c W)) relative to the peak
    double W = std::sqrt(-std::log(kTailTolerance / 4.0) / c);
    auto bound = [&](double w) { return 2.0 * std::exp(-c * w * w) / -std::expm1(-2.0 * c * w); };
    while (bound(W) > kTailTolerance)
        W *= 1.05;
    const double sh = std::sqrt(g.h);
    TorusState s;
    s.N = N;
    s.coeffs.resize(N);
    std::int64_t terms = 0;
    for (int n = 0; n < N; ++n) {
        const long double centre = (long double)g.h * n - f.q;
        const std::int64_t m_lo = std::int64_t(std::ceil(-W - centre));
        const std::int64_t m_hi = std::int64_t(std::floor(W - centre));
        cplx sum{};
        for (std::int64_t m = m_lo; m <= m_hi; ++m)
            sum += gaussian_eval(f, double((long double)g.h * n + m));
        terms += std::max<std::int64_t>(0, m_hi - m_lo + 1);
        s.coeffs[n] = sh * sum;
    }
    if (info)
        *info = {W, terms, bound(W) * std::abs(f.amp) * sh * N, std::abs(f.amp) * sh};
    return s;
}

inline TorusState symmetrized_wavepacket(const TorusPoint& pt, int N)
{
    return torus_coefficients(wavepacket(pt.q, pt.p, torus_h(N)));
}

// States realizing the Fourier-comb basis: wide Gaussians of momentum n/N whose
// coefficient vectors are concentrated on index n.
inline GaussianState comb_basis_state(int n, int N)
{
    const double h = torus_h(N);
    const double eps = 1.0 / (8.0 * N);
    GaussianState g{cplx(1.0, 0.0), cplx(0.0, eps), 0.0, double(n) / N, h};
    g.amp = 1.0 / g.norm();
    return g;
}

inline CMatrix comb_basis_matrix(int N, unsigned threads = 1)
{
    CMatrix G(N, N);
    parallel_for(std::size_t(N), threads, [&](std::size_t k) {
        G.col(Eigen::Index(k)) = torus_coefficients(comb_basis_state(int(k), N)).vector();
    });
    return G;
}

// Smallest eigenvalue of the Gram matrix of the normalized comb basis states.
inline double comb_gram_min_eigenvalue(int N)
{
    const CMatrix G = comb_basis_matrix(N);
    CMatrix gram = G.adjoint() * G;
    const Eigen::VectorXd dg = gram.diagonal().real().cwiseSqrt().cwiseInverse();
    gram = dg.asDiagonal() * gram * dg.asDiagonal();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// U with U * coeffs(Sigma g) = coeffs(Sigma M g), from U G = P on the comb basis.
inline CMatrix build_propagator_matrix(const Sl2IntMatrix& M, int N, unsigned threads = 1)
{
    torus_h(N);
    if (M.a == 0)
        throw ZeroACoefficient("propagator matrix needs a != 0");
    CMatrix G(N, N), P(N, N);
    parallel_for(std::size_t(N), threads, [&](std::size_t k) {
        const GaussianState phi = comb_basis_state(int(k), N);
        G.col(Eigen::Index(k)) = torus_coefficients(phi).vector();
        P.col(Eigen::Index(k)) = torus_coefficients(propagate_gaussian(M, phi, 1)).vector();
    });
    return G.transpose().partialPivLu().solve(P.transpose()).transpose();
}

inline double unitarity_defect(const CMatrix& U)
{
    return (U.adjoint() * U - CMatrix::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

// <(M)^n Sigma Phi_src, Sigma Phi_dst> by exact propagation and the lattice pairing.
inline LatticeSum matrix_element_detail(const Sl2IntMatrix& M, int n, const TorusPoint& src, const TorusPoint& dst,
                                        int N, std::int64_t term_cap = kDefaultTermCap)
{
    const double h = torus_h(N);
    if (n < 0)
        throw InvalidMatrix("negative power");
    const GaussianState g = propagate_gaussian(M, wavepacket(src.q, src.p, h), n);
    return pair_symmetrized_detail(g, wavepacket(dst.q, dst.p, h), term_cap);
}

inline cplx matrix_element_exact(const Sl2IntMatrix& M, int n, const TorusPoint& src, const TorusPoint& dst, int N)
{
    return matrix_element_detail(M, n, src, dst, N).value;
}

// D(Phi_{q,p}) = <D, Sigma Phi_{q,p}>
inline cplx torus_pairing(const TorusState& D, const TorusPoint& pt)
{
    return D.inner(symmetrized_wavepacket(pt, D.N));
}

struct HusimiGrid {
    int R = 0;
    double h = 0;
    std::vector<double> values; // row i is q = i/R, column j is p = j/R

    double at(int i, int j) const { return values[std::size_t(i) * R + j]; }
    double riemann_mass() const
    {
        double s = 0;
        for (double v : values)
            s += v;
        return s / (double(R) * R);
    }
};

// (1/h) |pairing(q, p)|^2 on the uniform R x R grid of the torus.
template <class Pairing>
    requires std::invocable<Pairing&, const TorusPoint&>
HusimiGrid husimi(Pairing&& pairing, int N, int R, unsigned threads = 1)
{
    const double h = torus_h(N);
    if (R < 8)
        throw Error("husimi grid resolution must be at least 8");
    HusimiGrid grid{R, h, std::vector<double>(std::size_t(R) * R)};
    parallel_for(grid.values.size(), threads, [&](std::size_t idx) {
        const TorusPoint pt{double(idx / R) / R, double(idx % R) / R};
        grid.values[idx] = std::norm(cplx(pairing(pt))) / h;
    });
    return grid;
}

inline HusimiGrid husimi(const TorusState& D, int R, unsigned threads = 1)
{
    return husimi([&](const TorusPoint& pt) { return torus_pairing(D, pt); }, D.N, R, threads);
}

inline std::vector<TorusPoint> wavepacket_lattice(int N)
{
    if (N < 1)
        throw NotPerfectSquare("N must be positive");
    const int K = int(std::lround(std::sqrt(double(N))));
    if (K * K != N)
        throw NotPerfectSquare("N = " + std::to_string(N) + " is not a perfect square");
    std::vector<TorusPoint> pts;
    pts.reserve(N);
    for (int j = 0; j < K; ++j)
        for (int l = 0; l < K; ++l)
            pts.push_back({double(j) / K, double(l) / K});
    return pts;
}

// Gram matrix of the symmetrized wave packets on the sqrt(h) lattice.
inline CMatrix frame_gram(int N, unsigned threads = 1)
{
    const std::vector<TorusPoint> pts = wavepacket_lattice(N);
    CMatrix V(N, Eigen::Index(pts.size()));
    parallel_for(pts.size(), threads, [&](std::size_t k) {
        V.col(Eigen::Index(k)) = symmetrized_wavepacket(pts[k], N).vector();
    });
    return V.adjoint() * V;
}

inline double frame_condition_number(int N)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(frame_gram(N), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    return ev.maxCoeff() / ev.minCoeff();
}

struct SpectrumPoint {
    double phase = 0; // in [0, 2 pi)
    double modulus = 1;
};

// Eigenvalues of a unitary matrix as (phase, modulus), ascending in phase.
inline std::vector<SpectrumPoint> unitary_spectrum(const CMatrix& U)
{
    Eigen::ComplexEigenSolver<CMatrix> es(U, false);
    std::vector<SpectrumPoint> out;
    out.reserve(std::size_t(U.rows()));
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        const cplx z = es.eigenvalues()[i];
        double a = std::arg(z);
        if (a < 0)
            a += 2 * std::numbers::pi;
        if (a >= 2 * std::numbers::pi)
            a = 0;
        out.push_back({a, std::abs(z)});
    }
    std::sort(out.begin(), out.end(), [](const SpectrumPoint& x, const SpectrumPoint& y) {
        return x.phase < y.phase || (x.phase == y.phase && x.modulus < y.modulus);
    });
    return out;
}

inline std::vector<double> eigenphases(const CMatrix& U)
{
    std::vector<double> out;
    for (const SpectrumPoint& s : unitary_spectrum(U))
        out.push_back(s.phase);
    return out;
}

} // namespace catmap
