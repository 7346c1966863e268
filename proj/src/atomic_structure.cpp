#include "ionmirror/atomic_structure.hpp"

#include "ionmirror/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ionmirror
{

std::string to_string(Level level)
{
    switch (level)
    {
    case Level::S12: return "S1/2";
    case Level::P12: return "P1/2";
    case Level::D32: return "D3/2";
    }
    return "?";
}

bool is_valid(Sublevel s)
{
    const int tj = two_j(s.level);
    return std::abs(s.two_m) <= tj && (tj - s.two_m) % 2 == 0;
}

int sublevel_index(Sublevel s)
{
    if (!is_valid(s))
        throw InvalidArgument("invalid magnetic quantum number for " + to_string(s.level));
    switch (s.level)
    {
    case Level::S12: return (s.two_m + 1) / 2;
    case Level::P12: return 2 + (s.two_m + 1) / 2;
    case Level::D32: return 4 + (s.two_m + 3) / 2;
    }
    return -1;
}

double zeeman_shift(const LevelScheme& scheme, Sublevel s)
{
    return scheme.g_factor(s.level) * s.m() * scheme.larmor_unit_mhz;
}

namespace
{

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M)
{
    if (two_m1 + two_m2 != two_M)
        return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J)
        return 0.0;
    if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2)
        return 0.0;
    if ((two_j1 + two_j2 + two_J) % 2 != 0 || (two_j1 - two_m1) % 2 != 0 ||
        (two_j2 - two_m2) % 2 != 0 || (two_J - two_M) % 2 != 0)
        return 0.0;

    // Racah's closed form; every argument below is an integer by the parity checks.
    const int a = (two_j1 + two_j2 - two_J) / 2;
    const int b = (two_j1 - two_m1) / 2;
    const int c = (two_j2 + two_m2) / 2;
    const int d = (two_J - two_j2 + two_m1) / 2;
    const int e = (two_J - two_j1 - two_m2) / 2;

    const double pre = std::sqrt(
        (two_J + 1) * factorial((two_J + two_j1 - two_j2) / 2) *
        factorial((two_J - two_j1 + two_j2) / 2) * factorial(a) /
        factorial((two_j1 + two_j2 + two_J) / 2 + 1));
    const double norm = std::sqrt(
        factorial((two_J + two_M) / 2) * factorial((two_J - two_M) / 2) *
        factorial((two_j1 - two_m1) / 2) * factorial((two_j1 + two_m1) / 2) *
        factorial((two_j2 - two_m2) / 2) * factorial((two_j2 + two_m2) / 2));

    const int k_min = std::max({0, -d, -e});
    const int k_max = std::min({a, b, c});
    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k)
    {
        const double den = factorial(k) * factorial(a - k) * factorial(b - k) *
                           factorial(c - k) * factorial(d + k) * factorial(e + k);
        sum += ((k % 2 == 0) ? 1.0 : -1.0) / den;
    }
    return pre * norm * sum;
}

double dipole_amplitude(Sublevel upper, Sublevel lower, int q)
{
    if (upper.level != Level::P12)
        throw InvalidArgument("dipole_amplitude: upper sublevel must belong to P1/2");
    if (lower.level == Level::P12)
        throw InvalidArgument("dipole_amplitude: lower sublevel must belong to S1/2 or D3/2");
    if (q < -1 || q > 1)
        throw InvalidArgument("dipole_amplitude: polarization index must be -1, 0 or +1");
    if (!is_valid(upper) || !is_valid(lower))
        throw InvalidArgument("dipole_amplitude: invalid sublevel");
    if (lower.two_m != upper.two_m - 2 * q)
        return 0.0;
    return clebsch_gordan(two_j(lower.level), lower.two_m, 2, 2 * q, two_j(upper.level), upper.two_m);
}

} // namespace ionmirror
