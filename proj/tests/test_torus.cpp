#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <catmap/quadrature.hpp>
#include <catmap/torus.hpp>

using namespace catmap;

namespace {

// Position-side route: Sigma g = sum_j c_j delta_{j/N}, c_j = (1/N) sum_k g(j/N - k),
// then d_n = sum_{j<N} c_j exp(-2 i pi n j / N).
std::vector<cplx> coefficients_from_comb(const GaussianState& g, int N, int K = 40)
{
    std::vector<cplx> c(N), d(N);
    for (int j = 0; j < N; ++j)
        for (int k = -K; k <= K; ++k)
            c[j] += gaussian_eval(g, double(j) / N - k) / double(N);
    for (int n = 0; n < N; ++n)
        for (int j = 0; j < N; ++j)
            d[n] += c[j] * cis_turns(-(long double)n * j / N);
    return d;
}

GaussianState sample_state(double h, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GaussianState g{cplx(U(rng), U(rng)), cplx(0.6 * U(rng), 0.5 + std::abs(U(rng))), U(rng), U(rng), h};
    return g;
}

} // namespace

TEST(TorusDimension, Errors)
{
    EXPECT_THROW(torus_dimension(1.0 / 3), OddN);
    EXPECT_THROW(torus_dimension(0.3), OddN);
    EXPECT_EQ(torus_dimension(1.0 / 8), 8);
    EXPECT_THROW(torus_h(5), OddN);
    EXPECT_THROW(pair_symmetrized(wavepacket(0, 0, 1.0 / 3), wavepacket(0, 0, 1.0 / 3)), OddN);
    EXPECT_THROW(pair_symmetrized(wavepacket(0, 0, 1.0 / 4), wavepacket(0, 0, 1.0 / 8)), MismatchedH);
    EXPECT_THROW(torus_coefficients(wavepacket(0, 0, 1.0 / 5)), OddN);
}

TEST(PairSymmetrized, DiagonalIsRealPositive)
{
    const GaussianState g = wavepacket(0, 0, 1.0 / 8);
    const LatticeSum r = pair_symmetrized_detail(g, g);
    EXPECT_GT(r.value.real(), 0.0);
    EXPECT_NEAR(r.value.imag(), 0.0, 1e-15);
    EXPECT_LT(r.truncation.certified_tail, 1e-13 * r.truncation.scale);
    EXPECT_GT(r.truncation.terms, 0);
}

TEST(PairSymmetrized, MatchesQuadratureLatticeSum)
{
    const double h = 0.5;
    const GaussianState g = wavepacket(0, 0, h);
    cplx oracle{};
    for (int k1 = -6; k1 <= 6; ++k1)
        for (int k2 = -6; k2 <= 6; ++k2) {
            const PlaneTranslation v{double(k1), double(k2)};
            auto tg = [&](double x) { return translate_apply([&](double y) { return gaussian_eval(g, y); }, v, h, x); };
            auto f = [&](double x) { return tg(x) * std::conj(gaussian_eval(g, x)); };
            oracle += integrate_split(f, product_window(translate(g, v), g), 64, 1e-11, 1e-13).value;
        }
    EXPECT_LT(std::abs(pair_symmetrized(g, g) - oracle), 1e-10);
}

TEST(PairSymmetrized, IntegerShiftChangesOnlyPhase)
{
    const double h = 1.0 / 10;
    std::mt19937_64 rng(3);
    const GaussianState g = sample_state(h, rng), t = wavepacket(0.2, 0.7, h);
    const cplx a = pair_symmetrized(g, t);
    for (const PlaneTranslation v : {PlaneTranslation{1, 0}, PlaneTranslation{0, 1}, PlaneTranslation{-2, 3}}) {
        const cplx b = pair_symmetrized(translate(g, v), t);
        EXPECT_NEAR(std::abs(a), std::abs(b), 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST(TorusCoefficients, CenteredPacketRealAtN2)
{
    const GaussianState g = wavepacket(0, 0, 0.5);
    const TorusState s = torus_coefficients(g);
    const std::vector<cplx> oracle = coefficients_from_comb(g, 2);
    for (int n = 0; n < 2; ++n) {
        EXPECT_NEAR(s.coeffs[n].imag(), 0.0, 1e-14);
        EXPECT_LT(std::abs(s.coeffs[n] - oracle[n]), 1e-12);
    }
}

TEST(TorusCoefficients, MatchPositionRouteAndLinearity)
{
    std::mt19937_64 rng(5);
    for (int N : {2, 4, 8, 16}) {
        const GaussianState g = sample_state(1.0 / N, rng);
        const TorusState s = torus_coefficients(g);
        const std::vector<cplx> oracle = coefficients_from_comb(g, N);
        for (int n = 0; n < N; ++n)
            EXPECT_LT(std::abs(s.coeffs[n] - oracle[n]), 1e-11) << N << " " << n;
        const cplx a(0.3, -1.2);
        const TorusState sa = torus_coefficients(g.scaled(a));
        for (int n = 0; n < N; ++n)
            EXPECT_LT(std::abs(sa.coeffs[n] - a * s.coeffs[n]), 1e-13);
    }
}

TEST(TorusCoefficients, ParsevalMatchesLatticePairing)
{
    std::mt19937_64 rng(9);
    for (int N : {2, 4, 8, 16, 32}) {
        const double h = 1.0 / N;
        for (int trial = 0; trial < 4; ++trial) {
            const GaussianState g1 = sample_state(h, rng), g2 = sample_state(h, rng);
            const cplx lattice = pair_symmetrized(g1, g2);
            const cplx parseval = torus_coefficients(g1).inner(torus_coefficients(g2));
            EXPECT_LT(std::abs(lattice - parseval), 1e-9 * g1.norm() * g2.norm()) << N;
        }
    }
}

TEST(CombBasis, FullRank)
{
    for (int N : {2, 4, 8, 16})
        EXPECT_GT(comb_gram_min_eigenvalue(N), 1e-10) << N;
}

TEST(Propagator, UnitaryAndDeterminant)
{
    for (int N : {2, 4, 8, 16}) {
        const CMatrix U = build_propagator_matrix(cat_matrix, N);
        EXPECT_LT(unitarity_defect(U), 1e-9) << N;
        EXPECT_NEAR(std::abs(U.determinant()), 1.0, 1e-10) << N;
    }
}

TEST(Propagator, Equivariance)
{
    std::mt19937_64 rng(21);
    for (int N : {4, 8, 16}) {
        const CMatrix U = build_propagator_matrix(cat_matrix, N);
        for (int trial = 0; trial < 3; ++trial) {
            const GaussianState g = sample_state(1.0 / N, rng);
            const CVector lhs = U * torus_coefficients(g).vector();
            const CVector rhs = torus_coefficients(propagate_gaussian(cat_matrix, g, 1)).vector();
            EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8) << N;
        }
    }
}

TEST(Propagator, OtherMatrixUnitary)
{
    const CMatrix U = build_propagator_matrix(Sl2IntMatrix{1, 1, 1, 2}, 8);
    EXPECT_LT(unitarity_defect(U), 1e-9);
    EXPECT_THROW(build_propagator_matrix(Sl2IntMatrix{0, 1, -1, 3}, 8), ZeroACoefficient);
}

TEST(Propagator, ThreadCountDoesNotChangeMatrix)
{
    const CMatrix a = build_propagator_matrix(cat_matrix, 16, 1);
    const CMatrix b = build_propagator_matrix(cat_matrix, 16, 4);
    EXPECT_TRUE(a == b);
}

TEST(MatrixElement, RoutesAgree)
{
    const int N = 16;
    const CMatrix U = build_propagator_matrix(cat_matrix, N);
    const TorusPoint src{0.0, 0.0}, dst{0.0, 0.0};
    EXPECT_LT(std::abs(matrix_element_exact(cat_matrix, 1, src, dst, N) -
                       (U * symmetrized_wavepacket(src, N).vector()).dot(symmetrized_wavepacket(dst, N).vector())),
              1e-8);
    const TorusPoint a{0.31, 0.72}, b{0.55, 0.12};
    CVector v = symmetrized_wavepacket(a, N).vector();
    const CVector w = symmetrized_wavepacket(b, N).vector();
    for (int n = 0; n <= 6; ++n) {
        // Eigen's dot conjugates its first argument
        const cplx viaU = w.dot(v);
        EXPECT_LT(std::abs(matrix_element_exact(cat_matrix, n, a, b, N) - viaU), 1e-8) << n;
        v = U * v;
    }
}

TEST(MatrixElement, DiagonalAndShiftInvariance)
{
    const int N = 8;
    const cplx d = matrix_element_exact(cat_matrix, 0, {0, 0}, {0, 0}, N);
    EXPECT_GT(d.real(), 0.0);
    EXPECT_NEAR(d.imag(), 0.0, 1e-14);
    const double base = std::abs(matrix_element_exact(cat_matrix, 3, {0.2, 0.3}, {0.6, 0.1}, N));
    EXPECT_NEAR(std::abs(matrix_element_exact(cat_matrix, 3, {1.2, -0.7}, {0.6, 2.1}, N)), base, 1e-12);
}

TEST(MatrixElement, TermCapIsReported)
{
    EXPECT_THROW(matrix_element_detail(cat_matrix, 8, {0.1, 0.2}, {0.3, 0.4}, 64, 10), TruncationOverflow);
}

TEST(Husimi, NonNegativeAndPeaked)
{
    const int N = 64, R = 64;
    const HusimiGrid H = husimi(symmetrized_wavepacket({0.5, 0.5}, N), R);
    int bi = 0, bj = 0;
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) {
            EXPECT_GE(H.at(i, j), 0.0);
            if (H.at(i, j) > H.at(bi, bj)) {
                bi = i;
                bj = j;
            }
        }
    EXPECT_LE(std::abs(bi - R / 2), 1);
    EXPECT_LE(std::abs(bj - R / 2), 1);
}

TEST(Husimi, RiemannMassMatchesNorm)
{
    const int N = 32;
    std::mt19937_64 rng(2);
    const TorusState D = torus_coefficients(sample_state(1.0 / N, rng));
    // refinement oracle: the mass must stabilize and agree with the norm
    const double m64 = husimi(D, 64).riemann_mass();
    const double m128 = husimi(D, 128).riemann_mass();
    EXPECT_LT(std::abs(m128 - m64), 1e-3 * m128);
    EXPECT_LT(std::abs(m128 - D.norm_sq()), 1e-3 * D.norm_sq());
}

TEST(Husimi, ThreadCountDoesNotChangeGrid)
{
    const TorusState D = symmetrized_wavepacket({0.3, 0.6}, 16);
    EXPECT_EQ(husimi(D, 32, 1).values, husimi(D, 32, 3).values);
    EXPECT_THROW(husimi(D, 4), Error);
}

TEST(WavepacketLattice, Grids)
{
    const auto p4 = wavepacket_lattice(4);
    ASSERT_EQ(p4.size(), 4u);
    EXPECT_EQ(p4[0].q, 0.0);
    EXPECT_EQ(p4[1].p, 0.5);
    EXPECT_EQ(p4[2].q, 0.5);
    EXPECT_EQ(p4[3].q, 0.5);
    EXPECT_EQ(p4[3].p, 0.5);
    const auto p16 = wavepacket_lattice(16);
    ASSERT_EQ(p16.size(), 16u);
    EXPECT_EQ(p16[5].q, 0.25);
    EXPECT_EQ(p16[5].p, 0.25);
    EXPECT_THROW(wavepacket_lattice(8), NotPerfectSquare);
}

TEST(WavepacketLattice, FrameConditioning)
{
    const double k = frame_condition_number(16);
    EXPECT_TRUE(std::isfinite(k));
    EXPECT_GT(k, 1.0);
    const CMatrix G = frame_gram(16);
    EXPECT_LT((G - G.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Eigenphases, SortedOnCircle)
{
    const CMatrix U = build_propagator_matrix(cat_matrix, 16);
    const std::vector<double> ph = eigenphases(U);
    ASSERT_EQ(ph.size(), 16u);
    for (std::size_t i = 0; i < ph.size(); ++i) {
        EXPECT_GE(ph[i], 0.0);
        EXPECT_LT(ph[i], 2 * std::numbers::pi);
        if (i)
            EXPECT_LE(ph[i - 1], ph[i]);
    }
}
