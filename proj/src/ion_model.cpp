#include "ionmirror/ion_model.hpp"

#include "ionmirror/errors.hpp"

namespace ionmirror
{

void SystemParams::validate() const
{
    if (!std::isfinite(scheme.larmor_unit_mhz))
        throw InvalidArgument("larmor unit must be finite");
    if (green.transition != Transition::Green || red.transition != Transition::Red)
        throw InvalidArgument("system needs exactly one green and one red drive");
    green.validate();
    red.validate();
    rates.validate();
    mirror.validate();
}

SystemParams SystemParams::at_phase(double psi) const
{
    SystemParams p = *this;
    p.mirror = mirror.at_phase(psi);
    return p;
}

SystemParams SystemParams::with_red_detuning(double detuning_mhz) const
{
    SystemParams p = *this;
    p.red.detuning_mhz = detuning_mhz;
    return p;
}

SystemParams SystemParams::defaults()
{
    SystemParams p;
    p.scheme.larmor_unit_mhz = 3.0;
    p.rates = {15.0, 5.0};
    p.green = {Transition::Green, -10.0, 10.0, Polarization::linear(kPi / 2)};
    p.red = {Transition::Red, 0.0, 10.0, Polarization::linear(kPi / 2)};
    p.mirror = {0.02, 0.0, true, true};
    return p;
}

const std::vector<std::string>& scalar_parameter_names()
{
    static const std::vector<std::string> names = {
        "gamma_g_mhz", "gamma_r_mhz", "detuning_g_mhz", "detuning_r_mhz", "rabi_g_mhz",
        "rabi_r_mhz",  "larmor_unit_mhz", "epsilon", "psi_rad"};
    return names;
}

namespace
{

double* parameter_slot(SystemParams& p, std::string_view name)
{
    if (name == "gamma_g_mhz") return &p.rates.gamma_g_mhz;
    if (name == "gamma_r_mhz") return &p.rates.gamma_r_mhz;
    if (name == "detuning_g_mhz") return &p.green.detuning_mhz;
    if (name == "detuning_r_mhz") return &p.red.detuning_mhz;
    if (name == "rabi_g_mhz") return &p.green.rabi_mhz;
    if (name == "rabi_r_mhz") return &p.red.rabi_mhz;
    if (name == "larmor_unit_mhz") return &p.scheme.larmor_unit_mhz;
    if (name == "epsilon") return &p.mirror.epsilon;
    if (name == "psi_rad") return &p.mirror.psi_rad;
    throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

} // namespace

double get_parameter(const SystemParams& params, std::string_view name)
{
    return *parameter_slot(const_cast<SystemParams&>(params), name);
}

void set_parameter(SystemParams& params, std::string_view name, double value)
{
    *parameter_slot(params, name) = value;
}

Eigen::MatrixXcd build_hamiltonian(const SystemParams& params)
{
    params.validate();
    const auto detunings = effective_detunings(params.green, params.red, params.rates, params.mirror);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(kNumSublevels, kNumSublevels);
    for (int i = 0; i < kNumSublevels; ++i)
    {
        const Sublevel s = kSublevels[i];
        double e = zeeman_shift(params.scheme, s);
        if (s.level == Level::S12)
            e -= detunings.green_mhz;
        else if (s.level == Level::D32)
            e -= detunings.red_mhz;
        h(i, i) = e;
    }

    for (int u = 0; u < kNumSublevels; ++u)
    {
        const Sublevel upper = kSublevels[u];
        if (upper.level != Level::P12)
            continue;
        for (int l = 0; l < kNumSublevels; ++l)
        {
            const Sublevel lower = kSublevels[l];
            if (lower.level == Level::P12)
                continue;
            const LaserDrive& drive = lower.level == Level::S12 ? params.green : params.red;
            for (int q = -1; q <= 1; ++q)
            {
                const double c = dipole_amplitude(upper, lower, q);
                if (c == 0.0)
                    continue;
                const std::complex<double> g = 0.5 * drive.rabi_mhz * drive.polarization.component(q) * c;
                h(u, l) += g;
                h(l, u) += std::conj(g);
            }
        }
    }
    return h;
}

std::vector<JumpOperator<double>> build_jump_operators(const SystemParams& params)
{
    params.validate();
    const double gamma_g = modified_gamma(params.rates, params.mirror);
    std::vector<JumpOperator<double>> jumps;
    jumps.reserve(6);
    for (Level target : {Level::S12, Level::D32})
    {
        const double rate = target == Level::S12 ? gamma_g : params.rates.gamma_r_mhz;
        for (int q = -1; q <= 1; ++q)
        {
            Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(kNumSublevels, kNumSublevels);
            for (int u = 0; u < kNumSublevels; ++u)
            {
                if (kSublevels[u].level != Level::P12)
                    continue;
                for (int l = 0; l < kNumSublevels; ++l)
                    if (kSublevels[l].level == target)
                        op(l, u) = dipole_amplitude(kSublevels[u], kSublevels[l], q);
            }
            jumps.push_back({rate, std::move(op)});
        }
    }
    return jumps;
}

Liouvillian<double> build_liouvillian(const SystemParams& params)
{
    const Eigen::MatrixXcd h = build_hamiltonian(params);
    const auto jumps = build_jump_operators(params);
    return build_liouvillian<double>(h, jumps);
}

double p_population(const DensityMatrix& rho)
{
    if (rho.rows() != kNumSublevels || rho.cols() != kNumSublevels)
        throw InvalidArgument("p_population: expected an 8x8 density matrix");
    return rho(2, 2).real() + rho(3, 3).real();
}

DensityMatrix solve_steady_state(const SystemParams& params, const SteadyStateOptions<double>& options)
{
    return steady_state(build_liouvillian(params), options);
}

} // namespace ionmirror
