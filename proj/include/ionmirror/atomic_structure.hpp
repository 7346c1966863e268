#pragma once

#include <array>
#include <string>

namespace ionmirror
{

enum class Level
{
    S12,
    P12,
    D32
};

std::string to_string(Level level);

// Twice the total angular momentum J of a fine-structure level.
constexpr int two_j(Level level)
{
    return level == Level::D32 ? 3 : 1;
}

// Zeeman sublevel. The magnetic quantum number is stored as 2m so that
// half-integers stay exact.
struct Sublevel
{
    Level level = Level::S12;
    int two_m = -1;

    constexpr double m() const { return 0.5 * two_m; }
    constexpr bool operator==(const Sublevel&) const = default;
};

constexpr int kNumSublevels = 8;

// Fixed basis order:
//   0,1  S1/2 m=-1/2,+1/2
//   2,3  P1/2 m=-1/2,+1/2
//   4..7 D3/2 m=-3/2,-1/2,+1/2,+3/2
constexpr std::array<Sublevel, kNumSublevels> kSublevels = {{
    {Level::S12, -1}, {Level::S12, +1},
    {Level::P12, -1}, {Level::P12, +1},
    {Level::D32, -3}, {Level::D32, -1}, {Level::D32, +1}, {Level::D32, +3},
}};

bool is_valid(Sublevel s);

// Index of a sublevel in the fixed basis. Throws InvalidArgument for an
// m outside the level's range.
int sublevel_index(Sublevel s);

// Pure-LS Landé factors.
constexpr double lande_g(Level level)
{
    switch (level)
    {
    case Level::S12: return 2.0;
    case Level::P12: return 2.0 / 3.0;
    case Level::D32: return 4.0 / 5.0;
    }
    return 0.0;
}

// Sublevel scheme of the ion in a static magnetic field. The field is given
// as larmor_unit_mhz = mu_B * B / h, an ordinary frequency in MHz.
struct LevelScheme
{
    double larmor_unit_mhz = 3.0;

    double g_factor(Level level) const { return lande_g(level); }
    const std::array<Sublevel, kNumSublevels>& sublevels() const { return kSublevels; }
};

// Linear Zeeman shift g * m * larmor_unit, MHz.
double zeeman_shift(const LevelScheme& scheme, Sublevel s);

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase),
// all angular momenta passed doubled. Returns 0 outside the selection rules.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

// Amplitude c of |lower><upper| in the spherical polarization channel q of
// the P1/2 decay towards lower (S1/2 or D3/2):
//   c = <J_lower m_lower; 1 q | 1/2 m_upper>,  nonzero only for m_lower = m_upper - q.
// For every P sublevel the squares summed over q and lower states of one
// decay channel equal 1.
double dipole_amplitude(Sublevel upper, Sublevel lower, int q);

} // namespace ionmirror
