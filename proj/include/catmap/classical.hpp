#pragma once

// Classical side: SL(2,Z) cat maps on the torus, their spectral data, the
// quadratic Hamiltonian whose time-one flow is the map, and the Ehrenfest time.

#include <cmath>
#include <cstdint>
#include <string>

#include "errors.hpp"
#include "phase.hpp"

namespace catmap {

struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Mat2 inverse() const { return {d, -b, -c, a}; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y)
    {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

struct Sl2IntMatrix {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static Sl2IntMatrix make(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
    {
        if (a * d - b * c != 1)
            throw InvalidMatrix("matrix determinant must be 1");
        return {a, b, c, d};
    }

    std::int64_t trace() const { return a + d; }
    bool hyperbolic() const { return trace() > 2 || trace() < -2; }
    Mat2 real() const { return {double(a), double(b), double(c), double(d)}; }

    friend Sl2IntMatrix operator*(const Sl2IntMatrix& x, const Sl2IntMatrix& y)
    {
        // u v + w z, throwing instead of wrapping around
        auto dot = [](std::int64_t u, std::int64_t v, std::int64_t w, std::int64_t z) {
            std::int64_t p, q, r;
            if (__builtin_mul_overflow(u, v, &p) || __builtin_mul_overflow(w, z, &q) || __builtin_add_overflow(p, q, &r))
                throw InvalidMatrix("integer overflow in matrix product");
            return r;
        };
        return {dot(x.a, y.a, x.b, y.c), dot(x.a, y.b, x.b, y.d),
                dot(x.c, y.a, x.d, y.c), dot(x.c, y.b, x.d, y.d)};
    }

    Sl2IntMatrix pow(int n) const
    {
        Sl2IntMatrix r{}, base = *this;
        if (n < 0) {
            base = {d, -b, -c, a};
            n = -n;
        }
        while (n > 0) {
            if (n & 1)
                r = r * base;
            n >>= 1;
            if (n > 0)
                base = base * base;
        }
        return r;
    }

    std::string str() const
    {
        return "[[" + std::to_string(a) + "," + std::to_string(b) + "],[" +
               std::to_string(c) + "," + std::to_string(d) + "]]";
    }
};

inline const Sl2IntMatrix cat_matrix{2, 1, 1, 1};

struct TorusPoint {
    double q = 0, p = 0;

    static TorusPoint reduced(double q, double p) { return {wrap01(q), wrap01(p)}; }
};

struct QuadraticHamiltonian {
    double alpha = 0, beta = 0, gamma = 0;

    // generator m = [[gamma, beta], [-alpha, -gamma]]
    Mat2 generator() const { return {gamma, beta, -alpha, -gamma}; }
};

struct FlowCoefficients {
    double t = 0;
    double a = 1, b = 0, c = 0, d = 1;

    Mat2 matrix() const { return {a, b, c, d}; }
};

struct SpectralData {
    double lambda = 1;
    double theta = 0;
    double lyapunov = 0;
};

inline TorusPoint cat_apply(const Sl2IntMatrix& M, const TorusPoint& pt)
{
    // integer entries times reals: keep the sum in long double before reducing
    const long double q = (long double)M.a * pt.q + (long double)M.b * pt.p;
    const long double p = (long double)M.c * pt.q + (long double)M.d * pt.p;
    return TorusPoint::reduced(double(q - std::floor(q)), double(p - std::floor(p)));
}

inline void require_positive_hyperbolic(const Sl2IntMatrix& M)
{
    if (!M.hyperbolic())
        throw NonHyperbolic("matrix " + M.str() + " is not hyperbolic (|trace| <= 2)");
    if (M.trace() < -2)
        throw NegativeSpectrum("matrix " + M.str() + " has negative eigenvalues");
}

inline SpectralData spectral_data(const Sl2IntMatrix& M)
{
    require_positive_hyperbolic(M);
    const double tr = double(M.trace());
    const double lambda = 0.5 * (tr + std::sqrt(tr * tr - 4.0));
    // unstable eigenvector (b, lambda - a), or (lambda - d, c) when b = 0
    double vx, vy;
    if (M.b != 0) {
        vx = double(M.b);
        vy = lambda - double(M.a);
    } else {
        vx = lambda - double(M.d);
        vy = double(M.c);
    }
    if (vx < 0) {
        vx = -vx;
        vy = -vy;
    }
    return {lambda, std::atan2(vy, vx), std::log(lambda)};
}

inline QuadraticHamiltonian hamiltonian_from_matrix(const Sl2IntMatrix& M)
{
    const SpectralData s = spectral_data(M);
    // log M = (log lambda) (P+ - P-) = k (M - M^-1) with k = log lambda / (lambda - 1/lambda)
    const double k = s.lyapunov / (s.lambda - 1.0 / s.lambda);
    QuadraticHamiltonian H;
    H.gamma = k * double(M.a - M.d);
    H.beta = 2.0 * k * double(M.b);
    H.alpha = -2.0 * k * double(M.c);
    return H;
}

// exp(t m) for traceless m: m^2 = delta I with delta = gamma^2 - alpha beta.
inline FlowCoefficients flow_coefficients(const QuadraticHamiltonian& H, double t)
{
    const Mat2 m = H.generator();
    const double delta = H.gamma * H.gamma - H.alpha * H.beta;
    const double z = delta * t * t;
    double ch, sh_over; // cosh(w t) and sinh(w t)/w, continued analytically
    if (std::abs(z) < 1e-6) {
        ch = 1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0;
        sh_over = t * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0);
    } else if (delta > 0) {
        const double w = std::sqrt(delta);
        ch = std::cosh(w * t);
        sh_over = std::sinh(w * t) / w;
    } else {
        const double w = std::sqrt(-delta);
        ch = std::cos(w * t);
        sh_over = std::sin(w * t) / w;
    }
    return {t, ch + sh_over * m.a, sh_over * m.b, sh_over * m.c, ch + sh_over * m.d};
}

inline double ehrenfest_time(double h, double lambda)
{
    return std::abs(std::log(h)) / (2.0 * std::log(lambda));
}

} // namespace catmap
