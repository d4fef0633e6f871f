#include <gtest/gtest.h>

#include <cmath>

#include <catmap/lagrangian.hpp>
#include <catmap/quadrature.hpp>

using namespace catmap;

namespace {

double cat_tan()
{
    return std::tan(spectral_data(cat_matrix).theta);
}

// direct sum over a box of every lattice point off the band, no truncation logic
double brute_off_band(const GaussianState& g, double q0, double p0, double t, int K)
{
    const double s = g.p - t * g.q;
    cplx sum{};
    const int mc = int(std::lround(g.q - q0));
    for (int m = mc - K; m <= mc + K; ++m) {
        const double q = q0 + m;
        const int jc = int(std::lround(q * t + s - p0));
        for (int j = jc - K; j <= jc + K; ++j) {
            const double p = p0 + j;
            const double delta = q * t + s - p; // band: delta in ]-1/2, 1/2]
            if (delta > -0.5 && delta <= 0.5)
                continue;
            sum += gaussian_overlap(g, wavepacket(q, p, g.h));
        }
    }
    return std::abs(sum);
}

cplx brute_band(const GaussianState& g, double q0, double p0, double t, int K)
{
    const double s = g.p - t * g.q;
    cplx sum{};
    const int mc = int(std::lround(g.q - q0));
    for (int m = mc - K; m <= mc + K; ++m) {
        const double q = q0 + m;
        const double x = q * t + s - p0;
        // smallest integer j with x - j <= 1/2, found by scanning
        int j = int(std::floor(x)) - 2;
        while (x - j > 0.5)
            ++j;
        sum += gaussian_overlap(g, wavepacket(q, p0 + j, g.h));
    }
    return sum;
}

} // namespace

TEST(Lagrangian, UnitNormAndConstant)
{
    const double lambda = spectral_data(cat_matrix).lambda;
    for (int n : {1, 3, 6}) {
        for (double h : {1.0 / 16, 1.0 / 64, 1.0 / 256}) {
            const DampedLagrangianState L = make_lagrangian(cat_matrix, n, h);
            EXPECT_NEAR(L.gaussian().norm_sq(), 1.0, 1e-13);
            // C h^{1/4} lambda^{n/2} does not depend on (h, n)
            EXPECT_NEAR(L.C * std::pow(h, 0.25) * std::pow(lambda, 0.5 * n), std::pow(2.0 * L.beta.real(), 0.25), 1e-12);
        }
    }
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 2, 1.0 / 16);
    EXPECT_NEAR(quad_overlap(L.gaussian(), L.gaussian()).real(), 1.0, 1e-9);
}

TEST(Lagrangian, EvaluationAtCentreAndProfile)
{
    const double h = 1.0 / 64;
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 4, h);
    EXPECT_LT(std::abs(lagrangian_eval(L, 0.0) - cplx(L.C, 0.0)), 1e-14);
    const double L2n = std::pow(L.lambda, 8.0);
    for (double x : {-0.7, 0.2, 1.3}) {
        const cplx v = lagrangian_eval(L, x);
        EXPECT_NEAR(std::abs(v), L.C * std::exp(-std::numbers::pi * L.beta.real() * x * x / (h * L2n)), 1e-13);
        EXPECT_NEAR(std::arg(v / cplx(std::cos(std::numbers::pi * L.tan() * x * x / h),
                                      std::sin(std::numbers::pi * L.tan() * x * x / h))),
                    0.0, 1e-9);
    }
}

TEST(Lagrangian, BetaMatchesExactShape)
{
    // Theta_n - tan = i beta lambda^{-2n} + O(lambda^{-4n})
    const SpectralData s = spectral_data(cat_matrix);
    const cplx beta = lagrangian_beta(s.theta);
    EXPECT_NEAR(beta.real(), 1.0 / std::pow(std::cos(s.theta), 2), 1e-14);
    for (int n = 2; n <= 6; ++n) {
        const GaussianState f = propagate_gaussian(cat_matrix, wavepacket(0, 0, 0.1), n);
        const double L2n = std::pow(s.lambda, 2.0 * n);
        const cplx eff = (f.theta - std::tan(s.theta)) / cplx(0, 1) * L2n;
        EXPECT_LT(std::abs(eff - beta), 0.1 * std::pow(s.lambda, -2.0 * n) * 10) << n;
    }
    // the +b kernel variant differs by 2 i tan / cos^2
    EXPECT_NEAR(kernel_plus_b_beta(s.theta).imag(), 2 * std::tan(s.theta) / std::pow(std::cos(s.theta), 2), 1e-14);
}

TEST(Lagrangian, OverlapClosedFormMatchesGaussianOverlap)
{
    for (double h : {1.0 / 8, 1.0 / 64}) {
        for (int n : {1, 3}) {
            for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.3, -0.45}, std::pair{-1.2, 0.8}}) {
                const DampedLagrangianState L = make_lagrangian(cat_matrix, n, h, a, b);
                const GaussianState e = explicit_lagrangian_gaussian(L);
                for (auto [q, p] : {std::pair{0.0, 0.0}, std::pair{0.25, 0.4}, std::pair{-0.6, -0.9}}) {
                    const cplx closed = overlap_lagrangian_wavepacket(L, q, p);
                    const cplx oracle = gaussian_overlap(e, wavepacket(q, p, h));
                    EXPECT_LT(std::abs(closed - oracle), 1e-12 * std::max(1.0, std::abs(oracle)))
                        << h << " " << n << " " << a << " " << b << " " << q << " " << p;
                }
            }
        }
    }
}

TEST(Lagrangian, OverlapClosedFormMatchesQuadrature)
{
    const double h = 1.0 / 10;
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 1, h, 0.2, 0.1);
    const GaussianState e = explicit_lagrangian_gaussian(L);
    for (auto [q, p] : {std::pair{0.1, 0.3}, std::pair{0.5, 1.0}}) {
        const cplx oracle = quad_overlap(e, wavepacket(q, p, h));
        EXPECT_LT(std::abs(overlap_lagrangian_wavepacket(L, q, p) - oracle), 1e-9);
    }
}

TEST(Lagrangian, OverlapDecomposition)
{
    const double h = 1.0 / 32;
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 3, h, 0.4, -0.2);
    const double L2n = L.lambda_2n();
    const cplx I(0, 1);
    const cplx c = cplx(1.0, -L.tan()) + L.beta / L2n;
    for (auto [q, p] : {std::pair{0.1, 0.2}, std::pair{-0.3, 0.7}}) {
        const OverlapTerms t = overlap_terms(L, q, p);
        const cplx w = cplx(p, q) - L.s() + I * L.beta * L.a / L2n;
        const cplx direct = w * w / c + q * q - 2.0 * I * p * q;
        EXPECT_LT(std::abs(t.A1 + t.A2 + t.A3 - direct), 1e-12 * std::abs(direct));
    }
    // alpha(n) = O(lambda^{-2n})
    for (int n = 2; n <= 10; ++n) {
        const cplx al = lagrangian_alpha(L.theta, L.beta, std::pow(L.lambda, 2.0 * n));
        EXPECT_LT(std::abs(al) * std::pow(L.lambda, 2.0 * n), 2.0) << n;
    }
}

TEST(Lagrangian, OverlapModulusProfile)
{
    // |<L, Phi_{q,p}>| ~ sqrt(h cos) C C_h exp(-pi cos^2 d^2 / h), d the vertical offset from the line
    const double h = 1.0 / 64;
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 12, h, 0.0, 0.1);
    const double cs = std::cos(L.theta);
    const double scale = std::sqrt(h * cs) * L.C * wavepacket_constant(h);
    for (double q : {0.0, 0.3, -0.5}) {
        for (double d : {0.0, 0.05, -0.12}) {
            const double p = q * L.tan() + L.s() + d;
            const double m = std::abs(overlap_lagrangian_wavepacket(L, q, p));
            EXPECT_NEAR(m / scale, std::exp(-std::numbers::pi * cs * cs * d * d / h), 1e-6);
        }
    }
}

TEST(Pointwise, ZeroViolationsModerateCase)
{
    const PointwiseReport r = check_pointwise_approx(cat_matrix, 3, 1.0 / 64);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GT(r.fitted_R, 0.0);
    // the fitted R reproduces the inequality on the double-precision sides
    for (double x : {-1.0, -0.3, 0.1, 0.6}) {
        const PointwiseSides s = pointwise_sides(cat_matrix, 3, 1.0 / 64, x, r.fitted_R, lagrangian_beta(spectral_data(cat_matrix).theta));
        EXPECT_LE(s.lhs, s.rhs * (1 + 1e-6) + 1e-300) << x;
    }
}

TEST(Pointwise, ExpressionMatchesDirectDifference)
{
    const double h = 1.0 / 64;
    const cplx beta = lagrangian_beta(spectral_data(cat_matrix).theta);
    const int n = 2;
    const lcplx E = pointwise_exponent(cat_matrix, n, beta);
    const GaussianState f = propagate_gaussian(cat_matrix, wavepacket(0, 0, h), n);
    for (double x : {0.2, 0.5, 1.0}) {
        const PointwiseSides s = pointwise_sides(cat_matrix, n, h, x, 0.0, beta);
        const double predicted = std::abs(gaussian_eval(f, x)) *
                                 double(std::abs(expm1_complex(-std::numbers::pi_v<long double> * x * x / h * E)));
        EXPECT_NEAR(s.lhs, predicted, 1e-6 * predicted + 1e-15) << x;
    }
}

TEST(Pointwise, DecayRate)
{
    const SpectralData sd = spectral_data(cat_matrix);
    std::vector<int> ns;
    std::vector<double> Rs, Rs_alt;
    for (int n = 2; n <= 8; ++n) {
        ns.push_back(n);
        Rs.push_back(check_pointwise_approx(cat_matrix, n, 1.0 / 64).fitted_R);
        Rs_alt.push_back(check_pointwise_approx(cat_matrix, n, 1.0 / 64, {}, kernel_plus_b_beta(sd.theta)).fitted_R);
    }
    const double target = -4 * std::log(sd.lambda);
    EXPECT_NEAR(log_slope(ns, Rs) / target, 1.0, 0.1);
    // with the +b kernel constant only lambda^{-2n} is reached
    EXPECT_NEAR(log_slope(ns, Rs_alt) / target, 0.5, 0.1);
}

TEST(Band, IndexerRemainderAndTies)
{
    const BandIndexer B = band_indexer(spectral_data(cat_matrix).theta, 0.3, 0.7, 0.1, -0.2);
    for (std::int64_t m = -50; m <= 50; ++m) {
        const double r = B.remainder(m);
        EXPECT_GT(r, -0.5);
        EXPECT_LE(r, 0.5);
        int count = 0;
        for (std::int64_t j = B.p(m) - 3; j <= B.p(m) + 3; ++j) {
            const long double x = B.offset(m) - j;
            count += (x > -0.5L && x <= 0.5L);
        }
        EXPECT_EQ(count, 1);
        // perpendicular distance from the band point to the line is at most cos/2
        const double q = B.q0 + m, p = B.p0 + B.p(m);
        const double dist = std::abs(q * B.tan + B.s_line - p) / std::sqrt(1 + B.tan * B.tan);
        EXPECT_LE(dist, 0.5 * std::cos(std::atan(B.tan)) + 1e-12);
    }
    // exact half-integers go to the upper end of ]-1/2, 1/2]
    const BandIndexer up{0.0, 0.0, 0.0, 0.0, 0.5};
    EXPECT_EQ(up.p(0), 0);
    EXPECT_EQ(up.remainder(0), 0.5);
    const BandIndexer down{0.0, 0.0, 0.0, 0.0, -0.5};
    EXPECT_EQ(down.p(0), -1);
    EXPECT_EQ(down.remainder(0), 0.5);
}

TEST(Band, OffBandTailMatchesBruteForce)
{
    const double h = 1.0 / 32;
    const double t = cat_tan();
    for (int n : {1, 3}) {
        const GaussianState g = propagate_gaussian(cat_matrix, wavepacket(0.1, 0.2, h), n);
        for (auto [q0, p0] : {std::pair{0.0, 0.0}, std::pair{0.37, 0.81}}) {
            const double tail = off_band_tail(g, q0, p0, t);
            const double oracle = brute_off_band(g, q0, p0, t, 40);
            EXPECT_NEAR(tail, oracle, 1e-13 + 1e-9 * oracle) << n;
        }
    }
}

TEST(Band, OffBandTailIsSmallForLagrangianStates)
{
    const double h = 1.0 / 64;
    const DampedLagrangianState L = make_lagrangian(cat_matrix, 6, h);
    EXPECT_LT(off_band_tail(L.gaussian(), 0.2, 0.3, L.tan()), 1e-12);
}

TEST(Band, BandSumMatchesBruteForce)
{
    const double h = 1.0 / 32;
    const double t = cat_tan();
    const GaussianState g = propagate_gaussian(cat_matrix, wavepacket(0.1, 0.2, h), 3);
    const BandIndexer B = band_indexer(spectral_data(cat_matrix).theta, 0.37, 0.81, g.q, g.p);
    const BandSum s = band_sum(g, B);
    const cplx oracle = brute_band(g, 0.37, 0.81, t, 60);
    EXPECT_LT(std::abs(s.value - oracle), 1e-13);
}

TEST(Band, PropagatedPairIsAligned)
{
    const double h = 1.0 / 64;
    for (const TorusPoint src : {TorusPoint{0, 0}, TorusPoint{0.3, -0.2}}) {
        double prev = 1;
        for (int n = 2; n <= 8; ++n) {
            const PropagatedPair pp = propagated_pair(cat_matrix, n, h, src);
            const cplx ov = gaussian_overlap(pp.exact, pp.lagrangian);
            const double err = std::abs(ov - 1.0);
            EXPECT_LT(err, prev) << n;
            prev = err;
        }
        EXPECT_LT(prev, 1e-6);
    }
}

TEST(Band, DifferenceWithinBound)
{
    const int N = 64;
    const double h = 1.0 / N;
    const SpectralData sd = spectral_data(cat_matrix);
    const int n0 = int(std::ceil(band_threshold(h, sd.lambda)));
    EXPECT_THROW(band_difference(cat_matrix, n0 - 1, h, 0.1, 0.2), ThresholdViolation);
    EXPECT_NO_THROW(band_difference(cat_matrix, n0 - 1, h, 0.1, 0.2, true));
    for (int n = n0; n <= n0 + 4; ++n) {
        for (auto [q0, p0] : {std::pair{0.0, 0.0}, std::pair{0.25, 0.6}}) {
            const BandDifference d = band_difference(cat_matrix, n, h, q0, p0);
            EXPECT_LE(d.difference, d.bound) << n;
        }
    }
}
