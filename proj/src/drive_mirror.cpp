#include "ionmirror/drive_mirror.hpp"

#include "ionmirror/errors.hpp"

#include <cmath>

namespace ionmirror
{

double wrap_phase(double angle)
{
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

Polarization::Polarization() : m_a{0.0, 1.0, 0.0} {}

Polarization::Polarization(const Components& components) : m_a(components)
{
    double norm2 = 0.0;
    for (const auto& a : m_a)
        norm2 += std::norm(a);
    if (!(norm2 > 0.0) || !std::isfinite(norm2))
        throw InvalidArgument("polarization vector must be finite and nonzero");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : m_a)
        a *= inv;
}

Polarization Polarization::linear(double angle_to_field_rad)
{
    const double s = std::sin(angle_to_field_rad) / std::sqrt(2.0);
    return Polarization(Components{s, std::cos(angle_to_field_rad), -s});
}

void LaserDrive::validate() const
{
    if (!std::isfinite(detuning_mhz))
        throw InvalidArgument("laser detuning must be finite");
    if (!(rabi_mhz >= 0.0) || !std::isfinite(rabi_mhz))
        throw InvalidArgument("laser Rabi frequency must be finite and >= 0");
}

void MirrorParams::validate() const
{
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw InvalidArgument("mirror epsilon must lie in [0, 1)");
    if (!(psi_rad >= 0.0 && psi_rad < kTwoPi))
        throw InvalidArgument("mirror phase psi must lie in [0, 2pi)");
}

MirrorParams MirrorParams::at_phase(double psi) const
{
    MirrorParams m = *this;
    m.psi_rad = wrap_phase(psi);
    return m;
}

void DecayRates::validate() const
{
    if (!(gamma_g_mhz > 0.0) || !(gamma_r_mhz > 0.0) || !std::isfinite(gamma_g_mhz) ||
        !std::isfinite(gamma_r_mhz))
        throw InvalidArgument("decay rates must be finite and > 0");
}

double modified_gamma(const DecayRates& rates, const MirrorParams& mirror)
{
    const double eps = mirror.decay_mod_enabled ? mirror.epsilon : 0.0;
    return rates.gamma_g_mhz * (1.0 - eps * std::cos(mirror.psi_rad));
}

double level_shift(const DecayRates& rates, const MirrorParams& mirror)
{
    if (!mirror.shift_enabled)
        return 0.0;
    return 0.5 * mirror.epsilon * rates.gamma_g_mhz * std::sin(mirror.psi_rad);
}

EffectiveDetunings effective_detunings(const LaserDrive& first, const LaserDrive& second,
                                       const DecayRates& rates, const MirrorParams& mirror)
{
    if (first.transition == second.transition)
        throw InvalidArgument("effective_detunings: need one green and one red drive");
    const LaserDrive& green = first.transition == Transition::Green ? first : second;
    const LaserDrive& red = first.transition == Transition::Red ? first : second;
    const double delta = level_shift(rates, mirror);
    return {green.detuning_mhz - delta, red.detuning_mhz - delta};
}

} // namespace ionmirror
