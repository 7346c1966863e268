#include "ionmirror/atomic_structure.hpp"
#include "ionmirror/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace ionmirror;

namespace
{

struct AmplitudeFixture
{
    Level lower;
    int two_mu;
    int two_ml;
    int q;
    double value;
};

// Exact rationals from an independent symbolic Clebsch-Gordan evaluation.
const AmplitudeFixture kFixtures[] = {
    {Level::S12, -1, +1, -1, std::sqrt(6.0) / 3.0},
    {Level::S12, -1, -1, 0, -std::sqrt(3.0) / 3.0},
    {Level::S12, +1, +1, 0, std::sqrt(3.0) / 3.0},
    {Level::S12, +1, -1, +1, -std::sqrt(6.0) / 3.0},
    {Level::D32, -1, +1, -1, std::sqrt(6.0) / 6.0},
    {Level::D32, -1, -1, 0, -std::sqrt(3.0) / 3.0},
    {Level::D32, -1, -3, +1, std::sqrt(2.0) / 2.0},
    {Level::D32, +1, +3, -1, std::sqrt(2.0) / 2.0},
    {Level::D32, +1, +1, 0, -std::sqrt(3.0) / 3.0},
    {Level::D32, +1, -1, +1, std::sqrt(6.0) / 6.0},
};

} // namespace

TEST_CASE("sublevel table and indices")
{
    CHECK(kSublevels.size() == 8);
    for (int i = 0; i < kNumSublevels; ++i)
    {
        CHECK(is_valid(kSublevels[i]));
        CHECK(sublevel_index(kSublevels[i]) == i);
    }
    CHECK_FALSE(is_valid({Level::S12, 3}));
    CHECK_FALSE(is_valid({Level::D32, 0}));
    CHECK_THROWS_AS(sublevel_index({Level::P12, 2}), InvalidArgument);
}

TEST_CASE("zeeman shifts")
{
    LevelScheme scheme;
    scheme.larmor_unit_mhz = 0.0;
    for (const auto& s : kSublevels)
        CHECK(zeeman_shift(scheme, s) == 0.0);

    scheme.larmor_unit_mhz = 3.0;
    CHECK(zeeman_shift(scheme, {Level::S12, +1}) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(zeeman_shift(scheme, {Level::D32, -3}) == doctest::Approx(-3.6).epsilon(1e-15));
    CHECK(zeeman_shift(scheme, {Level::P12, +1}) == doctest::Approx(1.0).epsilon(1e-15));

    for (const auto& s : kSublevels)
    {
        const Sublevel mirrored{s.level, -s.two_m};
        CHECK(zeeman_shift(scheme, s) == -zeeman_shift(scheme, mirrored));
        LevelScheme doubled{6.0};
        CHECK(zeeman_shift(doubled, s) == doctest::Approx(2.0 * zeeman_shift(scheme, s)).epsilon(1e-15));
    }
}

TEST_CASE("clebsch-gordan reference values")
{
    CHECK(clebsch_gordan(1, 1, 1, -1, 2, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(2, 2, 2, -2, 0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(2, 0, 2, 0, 4, 0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(clebsch_gordan(2, 0, 2, 0, 2, 0) == 0.0);
    CHECK(clebsch_gordan(1, 1, 1, 1, 2, 0) == 0.0);
}

TEST_CASE("dipole amplitude fixtures")
{
    for (const auto& f : kFixtures)
    {
        CAPTURE(f.two_mu);
        CAPTURE(f.two_ml);
        CAPTURE(f.q);
        const double c = dipole_amplitude({Level::P12, f.two_mu}, {f.lower, f.two_ml}, f.q);
        CHECK(c == doctest::Approx(f.value).epsilon(1e-14));
    }
}

TEST_CASE("dipole amplitude selection rule and table completeness")
{
    CHECK(dipole_amplitude({Level::P12, +1}, {Level::S12, -1}, 0) == 0.0);

    int nonzero = 0;
    for (const auto& up : kSublevels)
    {
        if (up.level != Level::P12)
            continue;
        for (const auto& low : kSublevels)
        {
            if (low.level == Level::P12)
                continue;
            for (int q = -1; q <= 1; ++q)
            {
                const double c = dipole_amplitude(up, low, q);
                if (low.two_m != up.two_m - 2 * q)
                    CHECK(c == 0.0);
                else if (c != 0.0)
                    ++nonzero;
            }
        }
    }
    CHECK(nonzero == 10);
    CHECK_THROWS_AS(dipole_amplitude({Level::S12, 1}, {Level::D32, 1}, 0), InvalidArgument);
    CHECK_THROWS_AS(dipole_amplitude({Level::P12, 1}, {Level::S12, 1}, 2), InvalidArgument);
}

TEST_CASE("branching sum rule per decay channel")
{
    for (const int two_mu : {-1, 1})
    {
        for (const Level lower : {Level::S12, Level::D32})
        {
            double total = 0.0;
            for (const auto& low : kSublevels)
            {
                if (low.level != lower)
                    continue;
                for (int q = -1; q <= 1; ++q)
                    total += std::pow(dipole_amplitude({Level::P12, two_mu}, low, q), 2);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("amplitudes under m and q reflection")
{
    for (const auto& up : kSublevels)
    {
        if (up.level != Level::P12)
            continue;
        for (const auto& low : kSublevels)
        {
            if (low.level == Level::P12)
                continue;
            for (int q = -1; q <= 1; ++q)
            {
                const double a = dipole_amplitude(up, low, q);
                const double b = dipole_amplitude({up.level, -up.two_m}, {low.level, -low.two_m}, -q);
                CHECK(a * a == b * b);
                CHECK(std::abs(a) == doctest::Approx(std::abs(b)).epsilon(1e-15));
            }
        }
    }
}
