#pragma once

// Eight-level Ba+ model: rotating-frame Hamiltonian and decay channels with
// the mirror amendments, fed into the generic Lindblad engine.

#include "ionmirror/atomic_structure.hpp"
#include "ionmirror/drive_mirror.hpp"
#include "ionmirror/lindblad.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace ionmirror
{

using DensityMatrix = Eigen::MatrixXcd;

struct SystemParams
{
    LevelScheme scheme;
    LaserDrive green{Transition::Green, 0.0, 0.0, {}};
    LaserDrive red{Transition::Red, 0.0, 0.0, {}};
    DecayRates rates;
    MirrorParams mirror;

    void validate() const;

    // Same parameters with the mirror phase replaced (wrapped into [0, 2pi)).
    SystemParams at_phase(double psi) const;
    SystemParams with_red_detuning(double detuning_mhz) const;

    // Working point: Gamma_g = 15, Gamma_r = 5, Omega_g = Omega_r = 10,
    // Delta_g = -10, Delta_r = 0, larmor unit 3 MHz, eps = 0.02, both lasers
    // linearly polarized perpendicular to the field.
    static SystemParams defaults();
};

// Scalar fields of SystemParams addressed by name: gamma_g_mhz, gamma_r_mhz,
// detuning_g_mhz, detuning_r_mhz, rabi_g_mhz, rabi_r_mhz, larmor_unit_mhz,
// epsilon, psi_rad. Unknown names throw InvalidArgument.
const std::vector<std::string>& scalar_parameter_names();
double get_parameter(const SystemParams& params, std::string_view name);
void set_parameter(SystemParams& params, std::string_view name, double value);

// 8x8 Hamiltonian in MHz. Diagonal: P at 0, S at -Delta'_g, D at -Delta'_r
// plus Zeeman shifts; couplings (Omega/2) a_q c on the P/lower entries.
Eigen::MatrixXcd build_hamiltonian(const SystemParams& params);

// Three green channels (q = -1, 0, +1) at the mirror-modified rate followed
// by three red channels at Gamma_r.
std::vector<JumpOperator<double>> build_jump_operators(const SystemParams& params);

Liouvillian<double> build_liouvillian(const SystemParams& params);

// Sum of the two P1/2 populations.
double p_population(const DensityMatrix& rho);

DensityMatrix solve_steady_state(const SystemParams& params,
                                 const SteadyStateOptions<double>& options = {});

} // namespace ionmirror
