#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace catmap {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

// Fractional part of a phase measured in turns, representative in [-1/2, 1/2).
inline long double reduce_turns(long double turns)
{
    return turns - std::floor(turns + 0.5L);
}

// exp(2*pi*i*turns), reduced in extended precision before the trig call.
inline cplx cis_turns(long double turns)
{
    const long double r = reduce_turns(turns);
    const long double a = 2.0L * std::numbers::pi_v<long double> * r;
    return {static_cast<double>(std::cos(a)), static_cast<double>(std::sin(a))};
}

// exp(i*pi*k) for an integer k.
inline double sign_pi(long long k)
{
    return (k % 2 == 0) ? 1.0 : -1.0;
}

// Signed representative of x mod 1 in ]-1/2, 1/2].
inline double circle_signed(double x)
{
    double r = x - std::floor(x);
    if (r > 0.5)
        r -= 1.0;
    return r;
}

inline double wrap01(double x)
{
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

// Shortest signed distance from x to y on the circle R/Z, in ]-1/2, 1/2].
inline double circle_distance(double x, double y)
{
    return circle_signed(x - y);
}

} // namespace catmap
