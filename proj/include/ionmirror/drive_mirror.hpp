#pragma once

#include <array>
#include <complex>

namespace ionmirror
{

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

// Maps any angle onto [0, 2pi).
double wrap_phase(double angle);

enum class Transition
{
    Green, // S1/2 <-> P1/2, 493 nm
    Red    // D3/2 <-> P1/2, 650 nm
};

// Spherical components (a_-1, a_0, a_+1) of a laser polarization relative to
// the magnetic-field axis.
class Polarization
{
public:
    using Components = std::array<std::complex<double>, 3>;

    Polarization();

    // Normalizes the given components. Throws InvalidArgument on a zero vector.
    explicit Polarization(const Components& components);

    // Linear polarization at the given angle to the field axis
    // (0 = pure pi, pi/2 = equal sigma+/sigma- mixture).
    static Polarization linear(double angle_to_field_rad);

    std::complex<double> component(int q) const { return m_a[q + 1]; }
    const Components& components() const { return m_a; }

private:
    Components m_a;
};

struct LaserDrive
{
    Transition transition = Transition::Green;
    double detuning_mhz = 0.0;
    double rabi_mhz = 0.0;
    Polarization polarization;

    void validate() const;
};

// Mirror back-action parameters. psi is the round-trip phase 2kl mod 2pi.
struct MirrorParams
{
    double epsilon = 0.0;
    double psi_rad = 0.0;
    bool decay_mod_enabled = true;
    bool shift_enabled = true;

    void validate() const;
    MirrorParams at_phase(double psi) const;
};

struct DecayRates
{
    double gamma_g_mhz = 15.0;
    double gamma_r_mhz = 5.0;

    void validate() const;
};

// Green decay rate in front of the mirror: Gamma_g (1 - eps cos psi).
double modified_gamma(const DecayRates& rates, const MirrorParams& mirror);

// P1/2 level shift (eps Gamma_g / 2) sin psi, subtracted from both detunings.
// Does not depend on any laser parameter.
double level_shift(const DecayRates& rates, const MirrorParams& mirror);

struct EffectiveDetunings
{
    double green_mhz = 0.0;
    double red_mhz = 0.0;
};

// (Delta_g - delta, Delta_r - delta). Drives may come in either order but
// must address different transitions.
EffectiveDetunings effective_detunings(const LaserDrive& first, const LaserDrive& second,
                                       const DecayRates& rates, const MirrorParams& mirror);

} // namespace ionmirror
